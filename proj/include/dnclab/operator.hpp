#pragma once

// Bounded operators on one-sided sequence space modeled exactly as a
// finite window plus a structured tail.
//
// Coordinates are 0-based. The space is split into k interleaved lanes
// (lane of coordinate i is i % k). Outside the window, T e_i = e_{i + k*s_r}
// with r the lane of i. With one lane this is the unilateral shift by s.
// Multiple lanes arise when two operators with different tail shifts are
// placed on the even/odd coordinates of a direct sum.

#include "dnclab/errors.hpp"
#include "dnclab/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace dnclab {

using Index = Eigen::Index;

class SequenceOperator {
 public:
  /// Identity on a single lane.
  SequenceOperator() : shifts_{0}, window_(0), block_(0, 0) {}

  /// General constructor. `block` holds the images of e_0..e_{window-1};
  /// rows past the block are zero. The window is enlarged when a column
  /// reaches below the row bound and then shrunk to canonical form.
  SequenceOperator(std::vector<int> lane_shifts, Index window, Matrix block)
      : shifts_(std::move(lane_shifts)) {
    if (shifts_.empty()) throw DomainError("operator needs at least one lane");
    if (window < 0 || block.cols() != window)
      throw DomainError("block must have exactly `window` columns");
    normalize(window, std::move(block));
  }

  static SequenceOperator identity(int lanes = 1) {
    return SequenceOperator(std::vector<int>(static_cast<std::size_t>(lanes), 0), 0, Matrix(0, 0));
  }

  static SequenceOperator shift(int s) { return SequenceOperator({s}, 0, Matrix(0, 0)); }

  /// I + K where K acts on the first K.cols() coordinates, single lane.
  static SequenceOperator identity_plus(const Matrix& k) {
    const Index n = std::max(k.rows(), k.cols());
    Matrix b = Matrix::Identity(n, n);
    b.topLeftCorner(k.rows(), k.cols()) += k;
    return SequenceOperator({0}, n, b);
  }

  /// Shift by s plus a finite-rank perturbation K on the leading coordinates.
  static SequenceOperator shift_plus(int s, const Matrix& k) {
    const SequenceOperator base = shift(s);
    const Index n = std::max({k.cols(), base.min_valid_window(), Index(0)});
    Matrix cols = base.columns(n, std::max(n + std::abs(s), k.rows()));
    cols.topLeftCorner(k.rows(), k.cols()) += k;
    return SequenceOperator({s}, n, cols);
  }

  /// Embeds a finite matrix J (r x c): J acts on e_0..e_{c-1}, the tail is
  /// the shift by r - c so that the infinite part is an isomorphism.
  static SequenceOperator finite(const Matrix& j) {
    const int s = static_cast<int>(j.rows() - j.cols());
    return SequenceOperator({s}, j.cols(), j);
  }

  int lanes() const { return static_cast<int>(shifts_.size()); }
  const std::vector<int>& lane_shifts() const { return shifts_; }
  /// Net tail shift; for a single lane this is the shift s itself.
  int tail_shift() const { return std::accumulate(shifts_.begin(), shifts_.end(), 0); }
  Index window() const { return window_; }
  const Matrix& block() const { return block_; }

  int min_shift() const { return *std::min_element(shifts_.begin(), shifts_.end()); }
  int max_abs_shift() const {
    int m = 0;
    for (int s : shifts_) m = std::max(m, std::abs(s));
    return m;
  }

  Index row_bound_for(Index window) const { return window + static_cast<Index>(lanes()) * max_abs_shift(); }
  Index row_bound() const { return row_bound_for(window_); }

  /// Smallest window for which every tail image index is non-negative.
  Index min_valid_window() const { return std::max<Index>(0, -static_cast<Index>(lanes()) * min_shift()); }

  /// Index of T e_i for i outside the window; negative means "no image".
  Index tail_image(Index i) const {
    const Index k = lanes();
    return i + k * shifts_[static_cast<std::size_t>(i % k)];
  }

  /// Dense column T e_j truncated to `rows` entries.
  Vector column(Index j, Index rows) const {
    Vector out = Vector::Zero(rows);
    if (j < window_) {
      const Index m = std::min(rows, block_.rows());
      out.head(m) = block_.col(j).head(m);
    } else {
      const Index t = tail_image(j);
      if (t >= 0 && t < rows) out[t] = 1.0;
    }
    return out;
  }

  /// Columns 0..cols-1 truncated to `rows`.
  Matrix columns(Index cols, Index rows) const {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j) out.col(j) = column(j, rows);
    return out;
  }

  /// Rectangular truncation P_rows T P_cols.
  Matrix dense(Index rows, Index cols) const { return columns(cols, rows); }

  Vector apply(const Vector& x) const {
    const Index k = lanes();
    const Index out_len = std::max<Index>(row_bound(), x.size() + k * std::max(0, max_shift()));
    Vector out = Vector::Zero(out_len);
    for (Index j = 0; j < x.size(); ++j) {
      if (x[j] == 0.0) continue;
      if (j < window_) {
        out.head(block_.rows()) += x[j] * block_.col(j);
      } else {
        out[tail_image(j)] += x[j];
      }
    }
    return out;
  }

  friend bool operator==(const SequenceOperator& a, const SequenceOperator& b) {
    return a.shifts_ == b.shifts_ && a.window_ == b.window_ && a.block_ == b.block_;
  }

  /// Structural equality up to entrywise tolerance.
  bool approx_equal(const SequenceOperator& other, double tol) const {
    if (shifts_ != other.shifts_) return false;
    const Index n = std::max(window_, other.window_);
    const Index r = std::max(row_bound_for(n), other.row_bound_for(n));
    return linalg::max_abs(Matrix(dense(r, n) - other.dense(r, n))) <= tol;
  }

 private:
  int max_shift() const { return *std::max_element(shifts_.begin(), shifts_.end()); }

  static constexpr double kSnap = 1e-13;

  void normalize(Index window, Matrix block) {
    for (Index j = 0; j < block.cols(); ++j)
      for (Index i = 0; i < block.rows(); ++i)
        if (std::abs(block(i, j)) < kSnap) block(i, j) = 0.0;

    Index n = std::max(window, min_valid_window());
    Index last_row = -1;
    for (Index j = 0; j < block.cols(); ++j)
      for (Index i = block.rows() - 1; i > last_row; --i)
        if (block(i, j) != 0.0) {
          last_row = i;
          break;
        }
    while (row_bound_for(n) <= last_row) ++n;

    window_ = n;
    const Index rows = row_bound_for(n);
    block_ = Matrix::Zero(rows, n);
    const Index copy_rows = std::min(rows, block.rows());
    block_.topLeftCorner(copy_rows, block.cols()) = block.topRows(copy_rows);
    for (Index j = block.cols(); j < n; ++j) {
      const Index t = tail_image(j);
      if (t >= 0) block_(t, j) = 1.0;
    }
    shrink();
  }

  void shrink() {
    while (window_ > min_valid_window()) {
      const Index j = window_ - 1;
      const Index t = tail_image(j);
      if (t < 0) break;
      bool is_tail = true;
      for (Index i = 0; i < block_.rows() && is_tail; ++i)
        is_tail = block_(i, j) == (i == t ? 1.0 : 0.0);
      if (!is_tail) break;
      const Index rows = row_bound_for(j);
      if (block_.rows() > rows &&
          linalg::max_abs(Matrix(block_.bottomLeftCorner(block_.rows() - rows, j))) != 0.0)
        break;
      block_ = Matrix(block_.topLeftCorner(rows, j));
      window_ = j;
    }
  }

  std::vector<int> shifts_;
  Index window_ = 0;
  Matrix block_;
};

/// T ∘ S. Both operators must use the same lane layout.
inline SequenceOperator compose(const SequenceOperator& t, const SequenceOperator& s) {
  if (t.lanes() != s.lanes()) throw DomainError("compose: lane layouts differ");
  const Index k = t.lanes();
  std::vector<int> shifts(t.lane_shifts().size());
  for (std::size_t r = 0; r < shifts.size(); ++r) shifts[r] = t.lane_shifts()[r] + s.lane_shifts()[r];
  const int min_sum = *std::min_element(shifts.begin(), shifts.end());
  const Index n = std::max<Index>({s.window(), t.window() - k * s.min_shift(), -k * min_sum, 0});
  const Index mid = std::max(s.row_bound_for(n), n + k * s.max_abs_shift()) + 1;
  const Index rows = std::max(t.row_bound_for(mid), mid + k * t.max_abs_shift()) + 1;
  Matrix block = t.dense(rows, mid) * s.dense(mid, n);
  return SequenceOperator(shifts, n, block);
}

inline SequenceOperator operator*(const SequenceOperator& t, const SequenceOperator& s) { return compose(t, s); }

/// Compact perturbations: P e_j = entries.col(j) for j < cols, zero beyond.
class FiniteRankOperator {
 public:
  FiniteRankOperator() = default;
  explicit FiniteRankOperator(Matrix entries) : entries_(std::move(entries)) {}

  static FiniteRankOperator zero() { return FiniteRankOperator(Matrix(0, 0)); }

  const Matrix& entries() const { return entries_; }
  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }

  Matrix dense(Index rows, Index cols) const {
    Matrix out = Matrix::Zero(rows, cols);
    const Index r = std::min(rows, entries_.rows());
    const Index c = std::min(cols, entries_.cols());
    out.topLeftCorner(r, c) = entries_.topLeftCorner(r, c);
    return out;
  }

  Vector apply(const Vector& x) const {
    const Index c = std::min(x.size(), entries_.cols());
    if (c == 0) return Vector::Zero(entries_.rows());
    return entries_.leftCols(c) * x.head(c);
  }

  FiniteRankOperator scaled(double c) const { return FiniteRankOperator(c * entries_); }

  friend FiniteRankOperator operator+(const FiniteRankOperator& a, const FiniteRankOperator& b) {
    const Index r = std::max(a.rows(), b.rows());
    const Index c = std::max(a.cols(), b.cols());
    return FiniteRankOperator(a.dense(r, c) + b.dense(r, c));
  }

 private:
  Matrix entries_;
};

/// P ∘ S.
inline FiniteRankOperator compose(const FiniteRankOperator& p, const SequenceOperator& s) {
  const Index k = s.lanes();
  const Index cols = std::max<Index>(s.window(), p.cols() - k * s.min_shift());
  const Index mid = std::max({s.row_bound_for(cols), cols + k * s.max_abs_shift(), p.cols()}) + 1;
  return FiniteRankOperator(p.dense(p.rows(), mid) * s.dense(mid, cols));
}

/// T ∘ P.
inline FiniteRankOperator compose(const SequenceOperator& t, const FiniteRankOperator& p) {
  const Index mid = p.rows();
  const Index rows = std::max(t.row_bound_for(mid), mid + t.lanes() * t.max_abs_shift()) + 1;
  return FiniteRankOperator(t.dense(rows, mid) * p.entries());
}

namespace seq {

/// Places x on even (factor 0) and y on odd (factor 1) coordinates.
inline Vector interleave(const Vector& x, const Vector& y) {
  const Index n = std::max(x.size(), y.size());
  Vector out = Vector::Zero(2 * n);
  for (Index i = 0; i < x.size(); ++i) out[2 * i] = x[i];
  for (Index i = 0; i < y.size(); ++i) out[2 * i + 1] = y[i];
  return out;
}

inline std::pair<Vector, Vector> deinterleave(const Vector& z) {
  const Index n = (z.size() + 1) / 2;
  Vector x = Vector::Zero(n), y = Vector::Zero(n);
  for (Index i = 0; i < z.size(); ++i) (i % 2 == 0 ? x[i / 2] : y[i / 2]) = z[i];
  return {x, y};
}

inline Vector add(const Vector& a, const Vector& b) {
  const Index n = std::max(a.size(), b.size());
  return linalg::resized(a, n) + linalg::resized(b, n);
}

inline Vector sub(const Vector& a, const Vector& b) {
  const Index n = std::max(a.size(), b.size());
  return linalg::resized(a, n) - linalg::resized(b, n);
}

/// Coordinate of last nonzero entry plus one.
inline Index support(const Vector& v, double tol = 0.0) {
  for (Index i = v.size(); i > 0; --i)
    if (std::abs(v[i - 1]) > tol) return i;
  return 0;
}

}  // namespace seq

/// Lower block triangular operator [[F, 0], [P, F2]] on a direct sum of two
/// sequence spaces.
class BlockOperator {
 public:
  BlockOperator(SequenceOperator f, FiniteRankOperator p, SequenceOperator f2)
      : f_(std::move(f)), p_(std::move(p)), f2_(std::move(f2)) {
    if (f_.lanes() != f2_.lanes()) throw DomainError("block factors must share a lane layout");
  }

  const SequenceOperator& f() const { return f_; }
  const SequenceOperator& f2() const { return f2_; }
  const FiniteRankOperator& p() const { return p_; }

  std::pair<Vector, Vector> apply(const Vector& x1, const Vector& x2) const {
    return {f_.apply(x1), seq::add(p_.apply(x1), f2_.apply(x2))};
  }

  /// Realization on a single sequence space via even/odd interleaving.
  SequenceOperator flatten() const {
    const Index k = f_.lanes();
    std::vector<int> shifts(static_cast<std::size_t>(2 * k));
    for (Index r = 0; r < k; ++r) {
      shifts[static_cast<std::size_t>(2 * r)] = f_.lane_shifts()[static_cast<std::size_t>(r)];
      shifts[static_cast<std::size_t>(2 * r + 1)] = f2_.lane_shifts()[static_cast<std::size_t>(r)];
    }
    const Index half = std::max({f_.window(), f2_.window(), p_.cols(), f_.min_valid_window(),
                                 f2_.min_valid_window()});
    const Index half_rows = std::max({f_.row_bound_for(half), f2_.row_bound_for(half), p_.rows()}) + 1;
    Matrix block = Matrix::Zero(2 * half_rows, 2 * half);
    for (Index i = 0; i < half; ++i) {
      const Vector e = Vector::Unit(i + 1, i);
      const auto [a1, a2] = apply(e, Vector(0));
      block.col(2 * i) = linalg::resized(seq::interleave(a1, a2), 2 * half_rows);
      const auto [b1, b2] = apply(Vector(0), e);
      block.col(2 * i + 1) = linalg::resized(seq::interleave(b1, b2), 2 * half_rows);
    }
    return SequenceOperator(shifts, 2 * half, block);
  }

 private:
  SequenceOperator f_;
  FiniteRankOperator p_;
  SequenceOperator f2_;
};

inline BlockOperator block_lower_triangular(SequenceOperator f, FiniteRankOperator p, SequenceOperator f2) {
  return BlockOperator(std::move(f), std::move(p), std::move(f2));
}

// ---------------------------------------------------------------------------
// Fredholm index and the structure group

struct KernelCokernel {
  Index level = 0;
  Index kernel_dim = 0;
  Index cokernel_dim = 0;
  long index() const { return static_cast<long>(kernel_dim) - static_cast<long>(cokernel_dim); }
  friend bool operator==(const KernelCokernel& a, const KernelCokernel& b) {
    return a.kernel_dim == b.kernel_dim && a.cokernel_dim == b.cokernel_dim;
  }
};

namespace detail {

inline Index round_up(Index n, Index k) { return ((n + k - 1) / k) * k; }

}  // namespace detail

/// Smallest level L at which T splits as (finite part) ⊕ (tail isomorphism).
inline Index reduction_level(const SequenceOperator& t) {
  const Index k = t.lanes();
  const Index need = std::max({t.window(), t.row_bound() - k * t.min_shift(), -k * t.min_shift(), Index(1)});
  return detail::round_up(need, k);
}

/// Codomain coordinates not reached by the tail of the domain beyond L.
inline std::vector<Index> finite_codomain(const SequenceOperator& t, Index level) {
  const Index k = t.lanes();
  std::vector<Index> rows;
  Index upper = 0;
  for (int s : t.lane_shifts()) upper = std::max(upper, level + k * s);
  for (Index i = 0; i < upper; ++i)
    if (i < level + k * t.lane_shifts()[static_cast<std::size_t>(i % k)]) rows.push_back(i);
  return rows;
}

/// Finite block of T at level L: domain e_0..e_{L-1}, codomain finite_codomain.
inline Matrix finite_part(const SequenceOperator& t, Index level, const std::vector<Index>& rows) {
  Index max_row = 0;
  for (Index r : rows) max_row = std::max(max_row, r + 1);
  const Matrix full = t.dense(std::max(max_row, Index(1)), level);
  Matrix out(static_cast<Index>(rows.size()), level);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = full.row(rows[i]);
  return out;
}

inline KernelCokernel kernel_cokernel(const SequenceOperator& t, Index level, const RankPolicy& policy = {}) {
  const auto rows = finite_codomain(t, level);
  const Matrix a = finite_part(t, level, rows);
  const Index r = linalg::rank(a, policy);
  return {level, level - r, static_cast<Index>(rows.size()) - r};
}

struct IndexOptions {
  /// Truncation level; 0 selects the smallest valid level.
  Index level = 0;
  RankPolicy policy{};
};

/// dim ker T - dim coker T, computed by linear algebra at levels L and L+5
/// (rounded to the lane count) and cross-checked against -tail_shift.
inline long fredholm_index(const SequenceOperator& t, const IndexOptions& opts = {}) {
  const Index k = t.lanes();
  const Index l1 = detail::round_up(opts.level > 0 ? opts.level : reduction_level(t), k);
  const Index l2 = detail::round_up(l1 + 5, k);
  const KernelCokernel a = kernel_cokernel(t, l1, opts.policy);
  const KernelCokernel b = kernel_cokernel(t, l2, opts.policy);
  if (!(a == b))
    throw StabilizationFailure("kernel/cokernel dims differ between levels " + std::to_string(l1) + " (" +
                               std::to_string(a.kernel_dim) + "," + std::to_string(a.cokernel_dim) + ") and " +
                               std::to_string(l2) + " (" + std::to_string(b.kernel_dim) + "," +
                               std::to_string(b.cokernel_dim) + ")");
  if (a.index() != -t.tail_shift())
    throw StabilizationFailure("linear-algebra index " + std::to_string(a.index()) +
                               " disagrees with structural index " + std::to_string(-t.tail_shift()));
  return a.index();
}

/// Membership in GL_K: zero tail shift on every lane and an invertible window.
inline bool is_glk(const SequenceOperator& t, const RankPolicy& policy = {}) {
  for (int s : t.lane_shifts())
    if (s != 0) return false;
  if (t.window() == 0) return true;
  return linalg::inverse_condition(t.block()) >= policy.rel_tol;
}

inline SequenceOperator inverse(const SequenceOperator& t, const RankPolicy& policy = {}) {
  if (!is_glk(t, policy)) throw NotGLK("operator is not in GL_K");
  if (t.window() == 0) return t;
  return SequenceOperator(t.lane_shifts(), t.window(), t.block().inverse());
}

/// Explicit inverse [[F^-1, 0], [-F2^-1 P F^-1, F2^-1]] of a GL~_K element.
inline BlockOperator inverse(const BlockOperator& b, const RankPolicy& policy = {}) {
  const SequenceOperator fi = inverse(b.f(), policy);
  const SequenceOperator f2i = inverse(b.f2(), policy);
  const FiniteRankOperator q = compose(f2i, compose(b.p(), fi)).scaled(-1.0);
  return BlockOperator(fi, q, f2i);
}

/// True iff F, F2 ∈ GL_K and the block inverse is confirmed as a two-sided
/// inverse on the flattened operator.
inline bool is_glk_tilde(const BlockOperator& b, const RankPolicy& policy = {}) {
  if (!is_glk(b.f(), policy) || !is_glk(b.f2(), policy)) return false;
  const SequenceOperator flat = b.flatten();
  const SequenceOperator inv = inverse(b, policy).flatten();
  const SequenceOperator id = SequenceOperator::identity(flat.lanes());
  return compose(flat, inv).approx_equal(id, 1e-9) && compose(inv, flat).approx_equal(id, 1e-9);
}

/// Straight-line path from B to its block diagonal: P is scaled by (1 - t).
inline BlockOperator retraction_path(const BlockOperator& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("retraction parameter outside [0, 1]");
  if (!is_glk_tilde(b)) throw NotGLK("retraction_path requires an element of GL~_K");
  if (t == 0.0) return b;
  return BlockOperator(b.f(), b.p().scaled(1.0 - t), b.f2());
}

/// sigma_min / sigma_max of the flattened window of a zero-shift block operator.
inline double window_inverse_condition(const BlockOperator& b) {
  const SequenceOperator flat = b.flatten();
  const Index n = flat.window();
  if (n == 0) return 1.0;
  return linalg::inverse_condition(flat.dense(n, n));
}

}  // namespace dnclab
