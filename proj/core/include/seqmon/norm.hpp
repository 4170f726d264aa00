#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace seqmon {

using param_vector = Eigen::VectorXd;

// A covariance estimate that cannot back a norm (zero, indefinite, or
// numerically singular).
class not_positive_definite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Norm |v|_A = sqrt(v' A v) for a symmetric positive definite A, evaluated
// through the Cholesky factor as |U v| with A = U' U.
class norm_matrix {
 public:
  explicit norm_matrix(Eigen::MatrixXd a);
  static norm_matrix identity(Eigen::Index p);

  Eigen::Index dim() const { return a_.rows(); }
  const Eigen::MatrixXd& matrix() const { return a_; }
  // Upper-triangular U with matrix() = U' U.
  const Eigen::MatrixXd& cholesky_upper() const { return u_; }

  double operator()(const param_vector& v) const;
  double squared(const param_vector& v) const;

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd u_;
};

inline double weighted_norm(const param_vector& v, const norm_matrix& a) { return a(v); }

// Norm induced by the inverse of a covariance matrix: |v|_{sigma^-1}.
// sigma must be symmetric (1e-8 relative tolerance) and positive definite.
norm_matrix invert_to_norm(const Eigen::MatrixXd& sigma);

}  // namespace seqmon
