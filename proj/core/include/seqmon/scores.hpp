#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "seqmon/norm.hpp"

namespace seqmon {

enum class functional_kind { mean, linear_model };

functional_kind parse_functional(std::string_view name);  // "mean" | "lm"
std::string_view to_string(functional_kind f);

// Mean functional: the score of an observation is the observation itself.
inline param_vector score_mean(const param_vector& x) { return x; }

// Linear model y = p'beta + e: the score is y * p.  Detectors compare
// partial-sample averages of these scores; the design second-moment matrix
// common to both samples cancels from the contrast.
inline param_vector score_lm(const param_vector& predictors, double response) {
  return response * predictors;
}

// Maps raw data rows to score vectors.  mean: the row is the observation
// (width = dimension).  linear_model: the row is (predictors..., response),
// width = dimension + 1.
class score_stream {
 public:
  score_stream(functional_kind f, Eigen::Index dimension);

  functional_kind functional() const { return functional_; }
  Eigen::Index dimension() const { return dim_; }
  Eigen::Index row_width() const;

  void score(std::span<const double> row, param_vector& out) const;
  param_vector score(std::span<const double> row) const;

 private:
  functional_kind functional_;
  Eigen::Index dim_;
};

// Prefix sums S_0, ..., S_n of score vectors; any partial-sample average
// (S_j - S_{i-1}) / (j - i + 1) costs O(p).
class prefix_sums {
 public:
  explicit prefix_sums(Eigen::Index p, bool compensated = false);

  Eigen::Index dim() const { return p_; }
  std::size_t size() const { return n_; }
  void append(const param_vector& z);

  // Average of scores i..j, 1-based inclusive.
  param_vector average(std::size_t i, std::size_t j) const;

  // Flat view of S_0..S_n; S_t starts at offset t * dim().
  std::span<const double> flat() const { return {sums_.data(), sums_.size()}; }

 private:
  Eigen::Index p_;
  std::size_t n_ = 0;
  bool compensated_;
  std::vector<double> sums_;
  std::vector<double> carry_;
};

}  // namespace seqmon
