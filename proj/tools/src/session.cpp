#include "session.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"

namespace seqmon::cli {

std::optional<bool> session_options::header() const {
  if (header_yes && header_no)
    throw std::runtime_error("--header and --no-header conflict");
  if (header_yes) return true;
  if (header_no) return false;
  return std::nullopt;
}

void session_options::require_m(const char* command) const {
  if (m == 0)
    throw std::runtime_error(std::string(command) +
                             ": --m is required (flag or config file)");
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

CLI::Option* add_config_flag(CLI::App& cmd, std::string& path) {
  return cmd.add_option("--config", path, "flat key=value option file");
}

void apply_config(CLI::App& cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string entry = trim_copy(line);
    if (entry.empty()) continue;
    const std::string at = path + ": line " + std::to_string(line_no) + ": ";
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(at + "expected key=value, got '" + entry + "'");
    const std::string key = trim_copy(std::string_view(entry).substr(0, eq));
    const std::string value = trim_copy(std::string_view(entry).substr(eq + 1));
    if (key.empty()) throw std::runtime_error(at + "empty key");
    CLI::Option* option = cmd.get_option_no_throw("--" + key);
    if (option == nullptr)
      throw std::runtime_error(at + "unknown option '" + key + "'");
    if (option->count() > 0) continue;  // the command line wins
    option->add_result(value);
    try {
      option->run_callback();
    } catch (const CLI::ParseError& e) {
      throw std::runtime_error(at + key + ": " + e.what());
    }
  }
}

void add_session_flags(CLI::App& cmd, session_options& opt) {
  cmd.add_option("input", opt.input, "csv data file, or - for standard input")
      ->required();
  cmd.add_option("--functional", opt.functional, "mean | lm")->capture_default_str();
  cmd.add_option("--m", opt.m, "training sample size (required)");
  cmd.add_option("--gamma", opt.gamma, "weight exponent in [0, 0.5)")
      ->capture_default_str();
  cmd.add_option("--alpha", opt.alpha, "significance level")->capture_default_str();
  cmd.add_option("--epsilon", opt.epsilon, "weight floor near t = 0")
      ->capture_default_str();
  cmd.add_option("--t-lower", opt.t_lower, "suppress the weight before k/m reaches this")
      ->capture_default_str();
  cmd.add_option("--T", opt.horizon_t,
                 "closed-end horizon as a multiple of m (default: open-end)");
  cmd.add_option("--detectors", opt.detectors, "comma list drawn from E,Q,P")
      ->capture_default_str();
  cmd.add_option("--bandwidth", opt.bandwidth,
                 "explicit long-run variance bandwidth (default: the rule)");
  cmd.add_option("--bandwidth-rule", opt.bandwidth_rule, "weak | strong")
      ->capture_default_str();
  cmd.add_option("--seed", opt.seed, "seed for simulated critical values")
      ->capture_default_str();
  cmd.add_option("--cache", opt.cache_file, "quantile cache file");
  cmd.add_option("--runs", opt.runs, "limit-law replications")->capture_default_str();
  cmd.add_option("--grid", opt.grid, "limit-law grid points")->capture_default_str();
  cmd.add_option("--threads", opt.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd.add_flag("--log-returns", opt.log_returns,
               "take columnwise log differences of the input first");
  auto* header = cmd.add_flag("--header", opt.header_yes, "first row is a header");
  cmd.add_flag("--no-header", opt.header_no, "first row is data")->excludes(header);
  add_config_flag(cmd, opt.config_file);
}

csv_table load_table(const std::string& path, std::optional<bool> header) {
  const std::string name = path == "-" ? std::string("<stdin>") : path;
  try {
    if (path == "-") return read_csv(std::cin, header);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file");
    return read_csv(in, header);
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

csv_table log_return_table(const csv_table& in) {
  if (in.row_count() < 2)
    throw std::runtime_error("log returns need at least two data rows");
  csv_table out;
  out.header = in.header;
  out.columns = in.columns;
  out.values.reserve(in.values.size() - in.columns);
  for (std::size_t r = 0; r < in.row_count(); ++r) {
    for (std::size_t c = 0; c < in.columns; ++c) {
      const double v = in.values[r * in.columns + c];
      if (!(v > 0.0))
        throw std::runtime_error("log returns need positive values; data row " +
                                 std::to_string(r + 1) + ", column " +
                                 std::to_string(c + 1) + " is " + format_g6(v));
      if (r > 0)
        out.values.push_back(std::log(v) -
                             std::log(in.values[(r - 1) * in.columns + c]));
    }
  }
  return out;
}

score_stream make_stream(functional_kind f, std::size_t columns) {
  if (columns == 0) throw std::runtime_error("input has no columns");
  if (f == functional_kind::linear_model && columns < 2)
    throw std::runtime_error(
        "lm input needs at least two columns (predictors..., response)");
  const auto dim = static_cast<Eigen::Index>(
      f == functional_kind::mean ? columns : columns - 1);
  return score_stream(f, dim);
}

std::vector<param_vector> score_rows(const csv_table& table, const score_stream& s) {
  std::vector<param_vector> out;
  out.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) out.push_back(s.score(table.row(r)));
  return out;
}

weight_function make_weight(const session_options& opt) {
  return weight_function(opt.gamma, opt.epsilon, opt.t_lower, opt.horizon_t);
}

lrv_config make_lrv(const session_options& opt) {
  lrv_config cfg;
  cfg.bandwidth = opt.bandwidth
                      ? *opt.bandwidth
                      : bandwidth_rule(opt.m, parse_bandwidth_strength(opt.bandwidth_rule));
  return cfg;
}

std::uint64_t closed_end_steps(std::size_t m, double horizon_t) {
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(m) * horizon_t));
}

std::vector<double> critical_values(const session_options& opt,
                                    std::span<const detector_kind> kinds, int p) {
  quantile_cache cache;
  const bool disk = !opt.cache_file.empty();
  if (disk) cache = quantile_cache::load(opt.cache_file);
  const mc_settings mc{opt.runs, opt.grid, opt.seed};
  std::vector<double> out;
  out.reserve(kinds.size());
  for (const auto kind : kinds) {
    const limit_spec spec{kind, opt.gamma, p, opt.horizon_t, opt.epsilon};
    const double cv = critical_value(spec, opt.alpha, mc, &cache, opt.threads);
    std::cerr << "critical value " << to_string(kind) << " (alpha "
              << format_g6(opt.alpha) << "): " << format_g6(cv)
              << (exact_quantile_available(spec) ? " (exact)\n" : " (simulated)\n");
    out.push_back(cv);
  }
  if (disk) cache.save(opt.cache_file);
  return out;
}

}  // namespace seqmon::cli
