#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "seqmon/lrv.hpp"
#include "seqmon/norm.hpp"
#include "seqmon/scores.hpp"
#include "seqmon/weight.hpp"

namespace seqmon {

enum class detector_kind { E, Q, P };

std::string_view to_string(detector_kind d);
detector_kind parse_detector(std::string_view name);
std::vector<detector_kind> parse_detectors(std::string_view names);  // e.g. "E,Q,P"

// Raw detector statistics at monitoring step k, over prefix sums holding the
// m training scores followed by k monitoring scores.  Each is m^-1/2 times a
// weighted-norm contrast of partial-sample averages:
//   E: max over splits j < k of (k-j) |avg(1..m+j) - avg(m+j+1..m+k)|
//   Q:                             k  |avg(1..m)   - avg(m+1..m+k)|
//   P: max over splits j < k of (k-j) |avg(1..m)   - avg(m+j+1..m+k)|
// E's j = 0 term equals Q, so E >= Q and P >= Q hold exactly.
double detector_e_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm);
double detector_q_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm,
                        bool post_window_includes_training_end = false);
double detector_p_value(const prefix_sums& s, std::size_t m, std::size_t k,
                        const norm_matrix& norm);

struct monitor_config {
  std::size_t m = 0;
  weight_function weight{};
  std::vector<detector_kind> detectors{detector_kind::E};
  std::vector<double> critical_values{};  // aligned with detectors
  std::uint64_t horizon = 0;              // 0 = open-end
  bool q_post_window_includes_training_end = false;
};

struct detector_report {
  detector_kind kind{};
  double raw = 0.0;
  double weighted = 0.0;
  bool rejected = false;
};

struct step_report {
  std::uint64_t k = 0;
  double weight = 0.0;
  std::array<detector_report, 3> slots{};
  std::size_t active = 0;
  std::span<const detector_report> detectors() const { return {slots.data(), active}; }
};

// Streaming monitor: trained once, then fed one score per step.  A step
// reports every configured detector's raw value, weighted value, and whether
// the weighted value exceeds its critical value.  First rejections are
// recorded; monitoring may continue past them.
class monitor {
 public:
  // Estimates the long-run variance of the training scores and monitors
  // under the induced inverse norm.
  monitor(std::span<const param_vector> training, const monitor_config& cfg,
          const lrv_config& lrv);
  // Monitors under an externally supplied norm (e.g. a known true variance).
  monitor(std::span<const param_vector> training, const monitor_config& cfg,
          norm_matrix norm);

  step_report step(const param_vector& score);

  std::uint64_t steps() const { return k_; }
  const monitor_config& config() const { return cfg_; }
  const norm_matrix& norm() const { return norm_; }
  std::optional<std::uint64_t> first_rejection(detector_kind d) const;
  bool all_rejected() const;

 private:
  void load_training(std::span<const param_vector> training);

  monitor_config cfg_;
  norm_matrix norm_;
  prefix_sums sums_;
  std::vector<double> inv_len_;  // inv_len_[t] = 1/t, grown with the stream
  std::uint64_t k_ = 0;
  std::array<std::optional<std::uint64_t>, 3> first_{};
};

}  // namespace seqmon
