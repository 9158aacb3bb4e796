#include "branelab/linalg.hpp"

#include <algorithm>
#include <limits>

namespace branelab {

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s(0));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return svd.matrixV().rightCols(n - r);
}

Eigen::MatrixXd column_space(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

double outside_residual(const Eigen::MatrixXd& q, const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::MatrixXd r = a;
  if (q.cols() > 0) r -= q * (q.transpose() * a);
  return r.cwiseAbs().maxCoeff();
}

double subspace_distance(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2) {
  if (q1.cols() != q2.cols()) return 1.0;
  if (q1.cols() == 0) return 0.0;
  Eigen::MatrixXd r = q2 - q1 * (q1.transpose() * q2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return std::min(1.0, svd.singularValues()(0));
}

}  // namespace branelab
