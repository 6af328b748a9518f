#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dnclab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative singular-value threshold used for every rank decision.
/// A singular value counts when sigma >= rel_tol * sigma_max.
struct RankPolicy {
  double rel_tol = 1e-8;
  /// Matrices whose largest singular value is below this are rank zero.
  double abs_floor = 1e-13;
};

inline RankPolicy default_rank_policy() { return {}; }

namespace linalg {

inline Vector singular_values(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

inline int rank_from_singular_values(const Vector& s, const RankPolicy& policy) {
  if (s.size() == 0) return 0;
  const double smax = s.maxCoeff();
  if (smax < policy.abs_floor) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] >= policy.rel_tol * smax) ++r;
  return r;
}

inline int rank(const Matrix& a, const RankPolicy& policy = {}) {
  return rank_from_singular_values(singular_values(a), policy);
}

/// sigma_min / sigma_max for a square matrix; 0 for singular or empty input.
inline double inverse_condition(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0) return 1.0;
  const double smax = s.maxCoeff();
  if (smax == 0.0) return 0.0;
  return s.minCoeff() / smax;
}

/// Orthonormal basis for the column space of `a`.
inline Matrix range_basis(const Matrix& a, const RankPolicy& policy = {}) {
  if (a.rows() == 0 || a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const int r = rank_from_singular_values(svd.singularValues(), policy);
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis for the kernel of `a`.
inline Matrix null_basis(const Matrix& a, const RankPolicy& policy = {}) {
  const Eigen::Index n = a.cols();
  if (n == 0) return Matrix(0, 0);
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), policy);
  return svd.matrixV().rightCols(n - r);
}

/// Orthonormal basis of the orthogonal complement of span(a) in R^rows.
inline Matrix orthogonal_complement(const Matrix& a, const RankPolicy& policy = {}) {
  if (a.cols() == 0) return Matrix::Identity(a.rows(), a.rows());
  return null_basis(a.transpose(), policy);
}

/// Orthonormal basis of the part of span(outer) orthogonal to span(inner).
inline Matrix relative_complement(const Matrix& outer, const Matrix& inner,
                                  const RankPolicy& policy = {}) {
  const Matrix q = range_basis(outer, policy);
  if (inner.cols() == 0) return q;
  const Matrix qi = range_basis(inner, policy);
  const Matrix residual = q - qi * (qi.transpose() * q);
  return range_basis(residual, policy);
}

/// Minimum-norm least-squares solution of a x = b.
inline Vector min_norm_solve(const Matrix& a, const Vector& b, const RankPolicy& policy = {}) {
  if (a.cols() == 0) return Vector(0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(policy.rel_tol);
  return cod.solve(b);
}

inline Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

inline Matrix vcat(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  out << a, b;
  return out;
}

inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

/// Copy of `v` zero-padded (or truncated) to length n.
inline Vector resized(const Vector& v, Eigen::Index n) {
  Vector out = Vector::Zero(n);
  const Eigen::Index m = std::min(n, v.size());
  out.head(m) = v.head(m);
  return out;
}

inline Matrix resized_rows(const Matrix& a, Eigen::Index rows) {
  Matrix out = Matrix::Zero(rows, a.cols());
  const Eigen::Index m = std::min(rows, a.rows());
  out.topRows(m) = a.topRows(m);
  return out;
}

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }
inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Orthogonal projector onto span(basis) applied to v.
inline Vector project_onto(const Matrix& orthonormal_basis, const Vector& v) {
  if (orthonormal_basis.cols() == 0) return Vector::Zero(v.size());
  return orthonormal_basis * (orthonormal_basis.transpose() * v);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace linalg
}  // namespace dnclab
