#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqmon {

// Monitoring weight w(t) = (1+t)^-1 * max((t/(1+t))^gamma, epsilon)^-1 for
// t = k/m, zeroed outside [t_lower, t_upper].  gamma in [0, 1/2) tunes
// sensitivity to early changes; epsilon keeps the weight finite at t = 0.
// A finite t_upper makes the scheme closed-end.
class weight_function {
 public:
  explicit weight_function(double gamma = 0.0, double epsilon = 1e-10,
                           double t_lower = 0.0,
                           double t_upper = std::numeric_limits<double>::infinity())
      : gamma_(gamma), epsilon_(epsilon), t_lower_(t_lower), t_upper_(t_upper) {
    if (!(gamma >= 0.0 && gamma < 0.5))
      throw std::invalid_argument("weight_function: gamma must lie in [0, 0.5)");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("weight_function: epsilon must be positive and finite");
    if (!(t_lower >= 0.0) || !(t_upper > t_lower))
      throw std::invalid_argument("weight_function: need 0 <= t_lower < t_upper");
  }

  double operator()(double t) const {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("weight_function: t must be finite and non-negative");
    if (t < t_lower_ || t > t_upper_) return 0.0;
    const double ratio = t / (1.0 + t);
    return 1.0 / ((1.0 + t) * std::max(std::pow(ratio, gamma_), epsilon_));
  }

  double gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  double t_lower() const { return t_lower_; }
  double t_upper() const { return t_upper_; }
  bool closed_end() const { return std::isfinite(t_upper_); }

 private:
  double gamma_;
  double epsilon_;
  double t_lower_;
  double t_upper_;
};

}  // namespace seqmon
