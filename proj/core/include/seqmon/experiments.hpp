#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqmon/limits.hpp"
#include "seqmon/lrv.hpp"
#include "seqmon/monitor.hpp"

namespace seqmon {

// Data-generating processes for the size and power studies: an i.i.d. stream
// and three AR(1) streams for the mean functional, and two regression designs
// (one conditionally heteroskedastic) for the linear-model functional.
enum class data_model { m1, m2, m3, m4, lm1, lm2 };

data_model parse_model(std::string_view name);  // "M1".."M4", "LM1", "LM2"
std::string_view to_string(data_model model);
functional_kind model_functional(data_model model);
Eigen::Index model_dimension(data_model model);  // score dimension
double model_ar_coefficient(data_model model);
// strong for the heavier AR models (phi >= 0.5), weak otherwise
bandwidth_strength default_bandwidth_strength(data_model model);

struct change_spec {
  std::uint64_t k_star = 1;  // first monitoring index affected
  double delta = 0.0;        // mean shift, or slope shift for regressions
};

struct generator_options {
  // Drive the LM2 volatility recursion with the raw innovation Z_{t-1}
  // instead of the generated regressor deviation G_{t-1} (clamped at zero).
  bool lm2_raw_innovation_volatility = false;
};

// m training rows followed by n monitoring rows.  Mean models emit one
// column; regression models emit (intercept, regressor, response).  The
// change applies from monitoring index k_star on.  Identical seeds give
// identical draws regardless of the change, so delta = 0 reproduces the
// no-change stream.
Eigen::MatrixXd generate(data_model model, std::size_t m, std::uint64_t n,
                         std::optional<change_spec> change, std::uint64_t seed,
                         const generator_options& opt = {});

// Long-run variance of the stationary score stream where a closed form
// exists (the mean-functional models); throws otherwise.
double true_lrv(data_model model);

struct experiment_plan {
  data_model model = data_model::m1;
  std::size_t m = 100;
  std::uint64_t horizon = 3000;
  double gamma = 0.0;
  double alpha = 0.05;
  double epsilon = 1e-10;
  double t_lower = 0.0;
  double t_upper = std::numeric_limits<double>::infinity();  // finite = closed-end
  std::vector<detector_kind> detectors{detector_kind::E, detector_kind::Q,
                                       detector_kind::P};
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  std::optional<double> bandwidth;  // explicit; otherwise the rule below
  std::optional<bandwidth_strength> bandwidth_rule_override;  // default per model
  bool use_true_lrv = false;
  generator_options generator{};
  bool q_post_window_includes_training_end = false;
  std::vector<double> deltas;            // power grid; must be non-empty
  std::vector<std::uint64_t> k_stars;    // power grid; empty -> {1, m, 2m, 4m}
};

double plan_bandwidth(const experiment_plan& plan);

struct experiment_row {
  data_model model{};
  std::size_t m = 0;
  double gamma = 0.0;
  detector_kind detector{};
  double delta = 0.0;
  std::uint64_t k_star = 0;
  std::uint64_t rejections = 0;
  std::uint64_t replications = 0;  // reps with a usable training variance
  std::uint64_t degenerate = 0;    // reps excluded for a degenerate variance
  double rate() const {
    return replications ? static_cast<double>(rejections) /
                              static_cast<double>(replications)
                        : 0.0;
  }
};

// Rejection rates under no change.  critical_values aligns with
// plan.detectors.  One row per detector.
std::vector<experiment_row> size_experiment(const experiment_plan& plan,
                                            std::span<const double> critical_values,
                                            unsigned threads = 0);

// Rejection rates over the (delta, k_star) grid; one row per cell and
// detector.  A delta of zero reproduces size_experiment exactly under the
// same plan seed.
std::vector<experiment_row> power_experiment(const experiment_plan& plan,
                                             std::span<const double> critical_values,
                                             unsigned threads = 0);

std::string experiment_csv(std::span<const experiment_row> rows);

}  // namespace seqmon
