#include "seqmon/norm.hpp"

#include <string>

namespace seqmon {

namespace {

void check_square(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty");
  if (!a.allFinite())
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

void check_symmetric(const Eigen::MatrixXd& a, const char* who) {
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if (asym > 1e-8 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

}  // namespace

norm_matrix::norm_matrix(Eigen::MatrixXd a) : a_(std::move(a)) {
  check_square(a_, "norm_matrix");
  check_symmetric(a_, "norm_matrix");
  a_ = symmetrize(a_);
  Eigen::LLT<Eigen::MatrixXd> llt(a_);
  if (llt.info() != Eigen::Success)
    throw not_positive_definite("norm_matrix: matrix is not positive definite");
  u_ = llt.matrixU();
}

norm_matrix norm_matrix::identity(Eigen::Index p) {
  return norm_matrix(Eigen::MatrixXd::Identity(p, p));
}

double norm_matrix::operator()(const param_vector& v) const {
  if (v.size() != a_.rows())
    throw std::invalid_argument("norm_matrix: vector dimension mismatch");
  return (u_ * v).norm();
}

double norm_matrix::squared(const param_vector& v) const {
  if (v.size() != a_.rows())
    throw std::invalid_argument("norm_matrix: vector dimension mismatch");
  return (u_ * v).squaredNorm();
}

norm_matrix invert_to_norm(const Eigen::MatrixXd& sigma) {
  check_square(sigma, "invert_to_norm");
  check_symmetric(sigma, "invert_to_norm");
  const Eigen::MatrixXd s = symmetrize(sigma);
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw not_positive_definite(
        "invert_to_norm: covariance is not positive definite; "
        "more training data or a smaller bandwidth may help");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
  return norm_matrix(symmetrize(inv));
}

}  // namespace seqmon
