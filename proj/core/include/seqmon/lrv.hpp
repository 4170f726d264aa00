#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "seqmon/norm.hpp"

namespace seqmon {

// Quadratic spectral kernel weight at lag ratio x; qs_kernel(0) = 1.
double qs_kernel(double x);

enum class bandwidth_strength { weak, strong };

bandwidth_strength parse_bandwidth_strength(std::string_view name);  // "weak" | "strong"

// weak: log10(m), for light serial dependence; strong: 4 log10(m).
double bandwidth_rule(std::size_t m, bandwidth_strength s);

struct lrv_config {
  double bandwidth = 1.0;
  bool center = true;
};

// Lag-h sample autocovariance with 1/m scaling:
// Gamma(h) = m^-1 sum_{t=1..m-h} (Z_t - Zbar)(Z_{t+h} - Zbar)'.
Eigen::MatrixXd sample_autocov(std::span<const param_vector> z, std::size_t lag,
                               bool center = true);

// Kernel long-run variance estimate
//   Gamma(0) + sum_{h=1..H} qs_kernel(h / bandwidth) (Gamma(h) + Gamma(h)'),
// truncated at H = min(m - 1, ceil(10 bandwidth)) and symmetrized.
Eigen::MatrixXd lrv_estimate(std::span<const param_vector> z, const lrv_config& cfg);

}  // namespace seqmon
