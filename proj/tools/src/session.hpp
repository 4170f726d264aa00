#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmon/csv.hpp"
#include "seqmon/limits.hpp"
#include "seqmon/lrv.hpp"
#include "seqmon/monitor.hpp"
#include "seqmon/scores.hpp"
#include "seqmon/weight.hpp"

namespace CLI {
class App;
class Option;
}

namespace seqmon::cli {

// Flags shared by the streaming subcommands (monitor, replay).
struct session_options {
  std::string input;  // positional; "-" reads standard input
  std::string functional = "mean";
  std::size_t m = 0;
  double gamma = 0.0;
  double alpha = 0.05;
  double epsilon = 1e-10;
  double t_lower = 0.0;
  double horizon_t = std::numeric_limits<double>::infinity();  // --T
  std::string detectors = "E,Q,P";
  std::optional<double> bandwidth;
  std::string bandwidth_rule = "weak";
  std::uint64_t seed = 42;
  std::string cache_file;
  std::size_t runs = 10000;
  std::size_t grid = 5000;
  unsigned threads = 0;
  bool log_returns = false;
  bool header_yes = false;
  bool header_no = false;
  std::string config_file;

  std::optional<bool> header() const;
  void require_m(const char* command) const;
};

void add_session_flags(CLI::App& cmd, session_options& opt);

// Plain --config support: merges a flat key=value file into cmd's options,
// skipping any option already given on the command line.
CLI::Option* add_config_flag(CLI::App& cmd, std::string& path);
void apply_config(CLI::App& cmd, const std::string& path);

std::string trim_copy(std::string_view s);

// Reads the numeric table from a file or "-"; errors carry the source name.
csv_table load_table(const std::string& path, std::optional<bool> header);

// Columnwise r_t = log(x_t) - log(x_{t-1}); every entry must be positive.
csv_table log_return_table(const csv_table& in);

// The score dimension is inferred from the column count: mean uses every
// column, lm treats the last column as the response.
score_stream make_stream(functional_kind f, std::size_t columns);
std::vector<param_vector> score_rows(const csv_table& table, const score_stream& s);

weight_function make_weight(const session_options& opt);
lrv_config make_lrv(const session_options& opt);
std::uint64_t closed_end_steps(std::size_t m, double horizon_t);

// One critical value per detector, exact where the limit law has a closed
// form and otherwise simulated; memoized in the cache file when one is given.
std::vector<double> critical_values(const session_options& opt,
                                    std::span<const detector_kind> kinds, int p);

void register_monitor(CLI::App& app, int& rc);
void register_quantiles(CLI::App& app, int& rc);
void register_experiment(CLI::App& app, int& rc);
void register_replay(CLI::App& app, int& rc);

}  // namespace seqmon::cli
