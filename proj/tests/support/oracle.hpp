#pragma once

// Independent reference computations shared by unit and acceptance tests.
// Nothing here calls into the library's own reduction code.

#include "dnclab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using dnclab::Index;
using dnclab::Matrix;
using dnclab::Vector;

// Dense truncation written straight from the operator definition.
inline Matrix dense(const std::vector<int>& shifts, Index window, const Matrix& block, Index rows, Index cols) {
  Matrix out = Matrix::Zero(rows, cols);
  const Index k = static_cast<Index>(shifts.size());
  for (Index j = 0; j < cols; ++j) {
    if (j < window) {
      for (Index i = 0; i < std::min(rows, block.rows()); ++i) out(i, j) = block(i, j);
    } else {
      const Index t = j + k * shifts[static_cast<std::size_t>(j % k)];
      if (t >= 0 && t < rows) out(t, j) = 1.0;
    }
  }
  return out;
}

inline Matrix dense(const dnclab::SequenceOperator& t, Index rows, Index cols) {
  return dense(t.lane_shifts(), t.window(), t.block(), rows, cols);
}

inline Index rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-9);
  return lu.rank();
}

// Single-lane surjectivity of [T | V] at a large level: rows 0..L+s-1 are
// exactly the coordinates the tail beyond L does not reach.
inline bool transversal(const dnclab::SequenceOperator& t, const Matrix& v_generators, Index level = 40) {
  const Index rows = level + t.tail_shift();
  Matrix a(rows, level + v_generators.cols());
  a.leftCols(level) = dense(t, rows, level);
  Matrix v = Matrix::Zero(rows, v_generators.cols());
  const Index m = std::min(rows, v_generators.rows());
  v.topRows(m) = v_generators.topRows(m);
  a.rightCols(v_generators.cols()) = v;
  return rank(a) == rows;
}

// Rows of the infinite codomain that no column at or beyond `level` reaches.
// Column j >= level lands on j + k * shift(j mod k), so row i is reached iff
// i - k * shift(i mod k) >= level.
inline std::vector<Index> free_rows(const std::vector<int>& shifts, Index level, Index rows) {
  const Index k = static_cast<Index>(shifts.size());
  std::vector<Index> out;
  for (Index i = 0; i < rows; ++i)
    if (i - k * shifts[static_cast<std::size_t>(i % k)] < level) out.push_back(i);
  return out;
}

struct FredholmCount {
  Index kernel = 0;
  Index cokernel = 0;
  long index() const { return static_cast<long>(kernel) - static_cast<long>(cokernel); }
};

// Kernel and cokernel dimensions of a multi-lane operator from one large
// dense truncation. `level` must be a multiple of the lane count, cover the
// window and exceed every |k * shift|.
inline FredholmCount fredholm(const dnclab::SequenceOperator& t, Index level) {
  const std::vector<int> s = t.lane_shifts();
  const Index k = static_cast<Index>(s.size());
  int top = 0;
  for (int v : s) top = std::max(top, v);
  const Index rows = std::max<Index>(t.block().rows(), level + k * top) + k;
  const Matrix a = dense(t, rows, level);
  const std::vector<Index> keep = free_rows(s, level, rows);
  Matrix pa(static_cast<Index>(keep.size()), level);
  for (std::size_t r = 0; r < keep.size(); ++r) pa.row(static_cast<Index>(r)) = a.row(keep[r]);
  const Index rk = rank(pa);
  return {level - rk, static_cast<Index>(keep.size()) - rk};
}

// Surjectivity of [T | V] for a finite-dimensional V given by generators,
// any lane count.
inline bool transversal_multi(const dnclab::SequenceOperator& t, const Matrix& v_generators, Index level) {
  const std::vector<int> s = t.lane_shifts();
  const Index k = static_cast<Index>(s.size());
  int top = 0;
  for (int v : s) top = std::max(top, v);
  const Index rows = std::max({t.block().rows(), level + k * top, v_generators.rows()}) + k;
  Matrix a(rows, level + v_generators.cols());
  a.leftCols(level) = dense(t, rows, level);
  a.rightCols(v_generators.cols()) = Matrix::Zero(rows, v_generators.cols());
  a.block(0, level, v_generators.rows(), v_generators.cols()) = v_generators;
  const std::vector<Index> keep = free_rows(s, level, rows);
  Matrix pa(static_cast<Index>(keep.size()), a.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) pa.row(static_cast<Index>(r)) = a.row(keep[r]);
  return rank(pa) == static_cast<Index>(keep.size());
}

// Smallest over largest singular value.
inline double inverse_condition(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector sv = svd.singularValues();
  return sv.size() == 0 || sv[0] == 0.0 ? 0.0 : sv[sv.size() - 1] / sv[0];
}

// Least-squares slope of log r against log t.
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& r) {
  const double n = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::log(t[i]), y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
