#include "seqmon/scores.hpp"

#include <stdexcept>
#include <string>

namespace seqmon {

functional_kind parse_functional(std::string_view name) {
  if (name == "mean") return functional_kind::mean;
  if (name == "lm") return functional_kind::linear_model;
  throw std::invalid_argument("unknown functional '" + std::string(name) +
                              "' (expected mean or lm)");
}

std::string_view to_string(functional_kind f) {
  return f == functional_kind::mean ? "mean" : "lm";
}

score_stream::score_stream(functional_kind f, Eigen::Index dimension)
    : functional_(f), dim_(dimension) {
  if (dim_ < 1) throw std::invalid_argument("score_stream: dimension must be >= 1");
}

Eigen::Index score_stream::row_width() const {
  return functional_ == functional_kind::mean ? dim_ : dim_ + 1;
}

void score_stream::score(std::span<const double> row, param_vector& out) const {
  if (static_cast<Eigen::Index>(row.size()) != row_width())
    throw std::invalid_argument("score_stream: row has " + std::to_string(row.size()) +
                                " columns, expected " + std::to_string(row_width()));
  out.resize(dim_);
  if (functional_ == functional_kind::mean) {
    for (Eigen::Index c = 0; c < dim_; ++c) out[c] = row[static_cast<std::size_t>(c)];
  } else {
    const double response = row[static_cast<std::size_t>(dim_)];
    for (Eigen::Index c = 0; c < dim_; ++c)
      out[c] = response * row[static_cast<std::size_t>(c)];
  }
}

param_vector score_stream::score(std::span<const double> row) const {
  param_vector out;
  score(row, out);
  return out;
}

prefix_sums::prefix_sums(Eigen::Index p, bool compensated)
    : p_(p), compensated_(compensated) {
  if (p_ < 1) throw std::invalid_argument("prefix_sums: dimension must be >= 1");
  sums_.assign(static_cast<std::size_t>(p_), 0.0);
  if (compensated_) carry_.assign(static_cast<std::size_t>(p_), 0.0);
}

void prefix_sums::append(const param_vector& z) {
  if (z.size() != p_) throw std::invalid_argument("prefix_sums: score dimension mismatch");
  const std::size_t p = static_cast<std::size_t>(p_);
  const std::size_t base = n_ * p;
  sums_.resize(sums_.size() + p);
  for (std::size_t c = 0; c < p; ++c) {
    const double prev = sums_[base + c];
    if (compensated_) {
      const double y = z[static_cast<Eigen::Index>(c)] - carry_[c];
      const double t = prev + y;
      carry_[c] = (t - prev) - y;
      sums_[base + p + c] = t;
    } else {
      sums_[base + p + c] = prev + z[static_cast<Eigen::Index>(c)];
    }
  }
  ++n_;
}

param_vector prefix_sums::average(std::size_t i, std::size_t j) const {
  if (i < 1 || j < i || j > n_)
    throw std::out_of_range("prefix_sums: average range [" + std::to_string(i) + ", " +
                            std::to_string(j) + "] invalid for " + std::to_string(n_) +
                            " scores");
  const std::size_t p = static_cast<std::size_t>(p_);
  const double inv = 1.0 / static_cast<double>(j - i + 1);
  param_vector out(p_);
  const double* hi = sums_.data() + j * p;
  const double* lo = sums_.data() + (i - 1) * p;
  for (std::size_t c = 0; c < p; ++c) out[static_cast<Eigen::Index>(c)] = (hi[c] - lo[c]) * inv;
  return out;
}

}  // namespace seqmon
