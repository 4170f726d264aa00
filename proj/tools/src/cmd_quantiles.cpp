#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "session.hpp"

namespace seqmon::cli {
namespace {

struct quantile_options {
  std::string detectors = "E,Q,P";
  std::vector<double> gammas{0.0, 0.25, 0.45};
  std::vector<double> alphas{0.01, 0.05, 0.10};
  int p = 1;
  double horizon_t = std::numeric_limits<double>::infinity();
  double epsilon = 1e-10;
  std::size_t runs = 10000;
  std::size_t grid = 5000;
  std::uint64_t seed = 42;
  std::string cache_file;
  unsigned threads = 0;
  std::string config_file;
};

int run_quantiles(const quantile_options& opt) {
  const std::vector<detector_kind> kinds = parse_detectors(opt.detectors);
  if (opt.gammas.empty() || opt.alphas.empty())
    throw std::runtime_error("quantiles: need at least one gamma and one alpha");

  quantile_cache cache;
  const bool disk = !opt.cache_file.empty();
  if (disk) cache = quantile_cache::load(opt.cache_file);
  const mc_settings mc{opt.runs, opt.grid, opt.seed};

  // Simulate each detector's paths once, shared across the gamma grid, and
  // take every alpha's order statistic from the same sample.
  for (const auto kind : kinds) {
    std::vector<double> missing;
    for (const double g : opt.gammas) {
      const limit_spec spec{kind, g, opt.p, opt.horizon_t, opt.epsilon};
      if (exact_quantile_available(spec)) continue;
      for (const double a : opt.alphas) {
        if (!cache.find(quantile_cache::key(spec, a, mc, false))) {
          missing.push_back(g);
          break;
        }
      }
    }
    if (missing.empty()) continue;
    const limit_spec base{kind, 0.0, opt.p, opt.horizon_t, opt.epsilon};
    const auto samples = simulate_limit_multi(base, missing, mc, opt.threads);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      const limit_spec spec{kind, missing[i], opt.p, opt.horizon_t, opt.epsilon};
      for (const double a : opt.alphas)
        cache.put(quantile_cache::key(spec, a, mc, false),
                  empirical_quantile(samples[i], a));
    }
  }

  const std::string horizon_text =
      std::isfinite(opt.horizon_t) ? format_g6(opt.horizon_t) : std::string("inf");
  std::cout << "detector,gamma,p,horizon,alpha,quantile,method\n";
  for (const auto kind : kinds)
    for (const double g : opt.gammas) {
      const limit_spec spec{kind, g, opt.p, opt.horizon_t, opt.epsilon};
      const bool exact = exact_quantile_available(spec);
      for (const double a : opt.alphas) {
        const double q = critical_value(spec, a, mc, &cache, opt.threads);
        std::cout << to_string(kind) << ',' << format_g6(g) << ',' << opt.p << ','
                  << horizon_text << ',' << format_g6(a) << ',' << format_g6(q) << ','
                  << (exact ? "exact" : "mc") << '\n';
      }
    }

  if (disk) cache.save(opt.cache_file);
  std::cerr << "limit-law settings: runs " << mc.runs << ", grid " << mc.grid
            << ", seed " << mc.seed << '\n';
  return 0;
}

}  // namespace

void register_quantiles(CLI::App& app, int& rc) {
  auto opt = std::make_shared<quantile_options>();
  CLI::App* cmd = app.add_subcommand(
      "quantiles", "tabulate limit-law quantiles over a detector/gamma/alpha grid");
  cmd->add_option("--detectors", opt->detectors, "comma list drawn from E,Q,P")
      ->capture_default_str();
  cmd->add_option("--gamma", opt->gammas, "weight exponents")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--alpha", opt->alphas, "significance levels")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--p", opt->p, "score dimension")->capture_default_str();
  cmd->add_option("--T", opt->horizon_t,
                  "closed-end horizon as a multiple of m (default: open-end)");
  cmd->add_option("--epsilon", opt->epsilon, "weight floor near t = 0")
      ->capture_default_str();
  cmd->add_option("--runs", opt->runs, "limit-law replications")->capture_default_str();
  cmd->add_option("--grid", opt->grid, "limit-law grid points")->capture_default_str();
  cmd->add_option("--seed", opt->seed, "limit-law seed")->capture_default_str();
  cmd->add_option("--cache", opt->cache_file, "quantile cache file");
  cmd->add_option("--threads", opt->threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  add_config_flag(*cmd, opt->config_file);
  cmd->callback([opt, cmd, &rc] {
    apply_config(*cmd, opt->config_file);
    rc = run_quantiles(*opt);
  });
}

}  // namespace seqmon::cli
