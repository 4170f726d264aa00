#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqmon/experiments.hpp"
#include "session.hpp"

namespace seqmon::cli {
namespace {

struct experiment_options {
  std::string plan_file;
  std::string out = "-";
  std::string cache_file;
  unsigned threads = 0;
  std::string config_file;
};

struct parsed_plan {
  experiment_plan plan;
  std::size_t runs = 10000;
  std::size_t grid = 5000;
  std::uint64_t cv_seed = 42;
};

[[noreturn]] void plan_fail(std::size_t line, const std::string& msg) {
  throw std::runtime_error("plan line " + std::to_string(line) + ": " + msg);
}

double plan_double(const std::string& v, const std::string& key, std::size_t line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    plan_fail(line, key + ": '" + v + "' is not a number");
  }
}

std::uint64_t plan_u64(const std::string& v, const std::string& key, std::size_t line) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    plan_fail(line, key + ": '" + v + "' is not a non-negative integer");
  return x;
}

bool plan_bool(const std::string& v, const std::string& key, std::size_t line) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  plan_fail(line, key + ": '" + v + "' is not a boolean (use true/false)");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const std::size_t comma = v.find(',', pos);
    out.push_back(trim_copy(std::string_view(v).substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

parsed_plan read_plan(std::istream& in) {
  parsed_plan out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string entry = trim_copy(line);
    if (entry.empty()) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) plan_fail(line_no, "expected key=value, got '" + entry + "'");
    const std::string key = trim_copy(std::string_view(entry).substr(0, eq));
    const std::string value = trim_copy(std::string_view(entry).substr(eq + 1));
    if (key.empty()) plan_fail(line_no, "empty key");
    if (value.empty()) plan_fail(line_no, key + ": empty value");
    experiment_plan& plan = out.plan;
    try {
      if (key == "model") plan.model = parse_model(value);
      else if (key == "m") plan.m = plan_u64(value, key, line_no);
      else if (key == "horizon") plan.horizon = plan_u64(value, key, line_no);
      else if (key == "gamma") plan.gamma = plan_double(value, key, line_no);
      else if (key == "alpha") plan.alpha = plan_double(value, key, line_no);
      else if (key == "epsilon") plan.epsilon = plan_double(value, key, line_no);
      else if (key == "t_lower") plan.t_lower = plan_double(value, key, line_no);
      else if (key == "t_upper") plan.t_upper = plan_double(value, key, line_no);
      else if (key == "detectors") plan.detectors = parse_detectors(value);
      else if (key == "replications") plan.replications = plan_u64(value, key, line_no);
      else if (key == "seed") plan.seed = plan_u64(value, key, line_no);
      else if (key == "bandwidth") plan.bandwidth = plan_double(value, key, line_no);
      else if (key == "bandwidth_rule")
        plan.bandwidth_rule_override = parse_bandwidth_strength(value);
      else if (key == "use_true_lrv") plan.use_true_lrv = plan_bool(value, key, line_no);
      else if (key == "lm2_raw_innovations")
        plan.generator.lm2_raw_innovation_volatility = plan_bool(value, key, line_no);
      else if (key == "q_post_overlap")
        plan.q_post_window_includes_training_end = plan_bool(value, key, line_no);
      else if (key == "deltas") {
        plan.deltas.clear();
        for (const auto& item : split_list(value))
          plan.deltas.push_back(plan_double(item, key, line_no));
      } else if (key == "k_stars") {
        plan.k_stars.clear();
        for (const auto& item : split_list(value))
          plan.k_stars.push_back(plan_u64(item, key, line_no));
      } else if (key == "runs") out.runs = plan_u64(value, key, line_no);
      else if (key == "grid") out.grid = plan_u64(value, key, line_no);
      else if (key == "cv_seed") out.cv_seed = plan_u64(value, key, line_no);
      else plan_fail(line_no, "unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      plan_fail(line_no, e.what());
    }
  }
  return out;
}

int run_experiment(const experiment_options& opt) {
  std::ifstream in(opt.plan_file);
  if (!in) throw std::runtime_error(opt.plan_file + ": cannot open file");
  parsed_plan parsed;
  try {
    parsed = read_plan(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(opt.plan_file + ": " + e.what());
  }
  const experiment_plan& plan = parsed.plan;

  session_options cv_opt;
  cv_opt.gamma = plan.gamma;
  cv_opt.alpha = plan.alpha;
  cv_opt.epsilon = plan.epsilon;
  cv_opt.horizon_t = plan.t_upper;
  cv_opt.seed = parsed.cv_seed;
  cv_opt.cache_file = opt.cache_file;
  cv_opt.runs = parsed.runs;
  cv_opt.grid = parsed.grid;
  cv_opt.threads = opt.threads;
  const std::vector<double> cvs = critical_values(
      cv_opt, plan.detectors, static_cast<int>(model_dimension(plan.model)));

  std::cerr << "model " << to_string(plan.model) << ", m " << plan.m << ", horizon "
            << plan.horizon << ", gamma " << format_g6(plan.gamma) << ", alpha "
            << format_g6(plan.alpha) << ", replications " << plan.replications
            << ", seed " << plan.seed << ", bandwidth " << format_g6(plan_bandwidth(plan))
            << (plan.use_true_lrv ? ", true variance\n" : "\n");

  const std::vector<experiment_row> rows =
      plan.deltas.empty() ? size_experiment(plan, cvs, opt.threads)
                          : power_experiment(plan, cvs, opt.threads);

  const std::string csv = experiment_csv(rows);
  if (opt.out == "-") {
    std::cout << csv;
  } else {
    std::ofstream os(opt.out);
    if (!os) throw std::runtime_error(opt.out + ": cannot open for writing");
    os << csv;
  }

  for (const auto& row : rows)
    if (row.degenerate)
      std::cerr << to_string(row.model) << ' ' << to_string(row.detector) << " delta "
                << format_g6(row.delta) << " k* " << row.k_star << ": " << row.degenerate
                << " degenerate training variances excluded\n";
  return 0;
}

}  // namespace

void register_experiment(CLI::App& app, int& rc) {
  auto opt = std::make_shared<experiment_options>();
  CLI::App* cmd = app.add_subcommand(
      "experiment", "run a size or power study from a key=value plan file");
  cmd->add_option("plan", opt->plan_file, "plan file (key=value lines)")->required();
  cmd->add_option("--out", opt->out, "output csv file, or - for standard output")
      ->capture_default_str();
  cmd->add_option("--cache", opt->cache_file, "quantile cache file");
  cmd->add_option("--threads", opt->threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  add_config_flag(*cmd, opt->config_file);
  cmd->callback([opt, cmd, &rc] {
    apply_config(*cmd, opt->config_file);
    rc = run_experiment(*opt);
  });
}

}  // namespace seqmon::cli
