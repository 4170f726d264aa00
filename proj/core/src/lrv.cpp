#include "seqmon/lrv.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seqmon {

double qs_kernel(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("qs_kernel: x must be finite");
  constexpr double pi = std::numbers::pi;
  const double z = 6.0 * pi * x / 5.0;
  // Series around 0 avoids the 0/0 cancellation in sin(z)/z - cos(z).
  if (std::abs(z) < 1e-3) return 1.0 - z * z / 10.0;
  return 25.0 / (12.0 * pi * pi * x * x) * (std::sin(z) / z - std::cos(z));
}

bandwidth_strength parse_bandwidth_strength(std::string_view name) {
  if (name == "weak") return bandwidth_strength::weak;
  if (name == "strong") return bandwidth_strength::strong;
  throw std::invalid_argument("unknown bandwidth rule '" + std::string(name) +
                              "' (expected weak or strong)");
}

double bandwidth_rule(std::size_t m, bandwidth_strength s) {
  if (m < 2) throw std::invalid_argument("bandwidth_rule: need m >= 2");
  const double b = std::log10(static_cast<double>(m));
  return s == bandwidth_strength::weak ? b : 4.0 * b;
}

namespace {

Eigen::MatrixXd centered_columns(std::span<const param_vector> z, bool center) {
  const Eigen::Index p = z[0].size();
  const Eigen::Index m = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd zc(p, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    if (z[static_cast<std::size_t>(t)].size() != p)
      throw std::invalid_argument("sample_autocov: inconsistent score dimensions");
    zc.col(t) = z[static_cast<std::size_t>(t)];
  }
  if (center) zc.colwise() -= zc.rowwise().mean().eval();
  return zc;
}

Eigen::MatrixXd autocov_from_centered(const Eigen::MatrixXd& zc, Eigen::Index h) {
  const Eigen::Index m = zc.cols();
  return (zc.leftCols(m - h) * zc.rightCols(m - h).transpose()) /
         static_cast<double>(m);
}

}  // namespace

Eigen::MatrixXd sample_autocov(std::span<const param_vector> z, std::size_t lag,
                               bool center) {
  if (z.empty()) throw std::invalid_argument("sample_autocov: empty sample");
  if (lag >= z.size())
    throw std::out_of_range("sample_autocov: lag " + std::to_string(lag) +
                            " out of range for " + std::to_string(z.size()) + " scores");
  const Eigen::MatrixXd zc = centered_columns(z, center);
  return autocov_from_centered(zc, static_cast<Eigen::Index>(lag));
}

Eigen::MatrixXd lrv_estimate(std::span<const param_vector> z, const lrv_config& cfg) {
  if (z.size() < 2) throw std::invalid_argument("lrv_estimate: need at least 2 scores");
  if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth))
    throw std::invalid_argument("lrv_estimate: bandwidth must be positive and finite");
  const Eigen::MatrixXd zc = centered_columns(z, cfg.center);
  const std::size_t m = z.size();
  const std::size_t cap = static_cast<std::size_t>(std::ceil(10.0 * cfg.bandwidth));
  const std::size_t h_max = std::min(m - 1, cap);
  Eigen::MatrixXd sigma = autocov_from_centered(zc, 0);
  for (std::size_t h = 1; h <= h_max; ++h) {
    const double w = qs_kernel(static_cast<double>(h) / cfg.bandwidth);
    const Eigen::MatrixXd g = autocov_from_centered(zc, static_cast<Eigen::Index>(h));
    sigma += w * (g + g.transpose());
  }
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace seqmon
