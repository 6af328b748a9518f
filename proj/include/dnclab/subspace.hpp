#pragma once

// Closed complemented subspaces of sequence space in a finitely describable
// form: a finite basis, optionally together with every standard coordinate
// from `tail_from` onwards.

#include "dnclab/operator.hpp"

#include <optional>

namespace dnclab {

class Subspace {
 public:
  Subspace() = default;

  /// span(basis) plus, when given, every e_i with i >= tail_from. Basis
  /// coordinates at or beyond tail_from are dropped since the tail already
  /// contains them.
  explicit Subspace(Matrix basis, std::optional<Index> tail_from = std::nullopt)
      : basis_(std::move(basis)), tail_from_(tail_from) {
    if (tail_from_) {
      if (*tail_from_ < 0) throw DomainError("tail_from must be non-negative");
      if (basis_.rows() > *tail_from_) basis_ = Matrix(basis_.topRows(*tail_from_));
    }
  }

  static Subspace zero() { return Subspace(Matrix(0, 0)); }
  static Subspace whole() { return Subspace(Matrix(0, 0), Index(0)); }
  /// span{e_0, ..., e_{n-1}}.
  static Subspace leading(Index n) { return Subspace(Matrix::Identity(n, n)); }
  /// span{e_i : i >= n}.
  static Subspace trailing(Index n) { return Subspace(Matrix(0, 0), n); }

  const Matrix& basis() const { return basis_; }
  const std::optional<Index>& tail_from() const { return tail_from_; }
  bool cofinite() const { return tail_from_.has_value(); }

  /// Every generator vanishes at coordinates >= support_bound(), except the tail.
  Index support_bound() const { return std::max(basis_.rows(), tail_from_.value_or(0)); }

  /// Generators with coordinates below `level`: the basis (padded or cut)
  /// followed by e_i for tail_from <= i < level.
  Matrix generators(Index level) const {
    Matrix g = linalg::resized_rows(basis_, level);
    if (!tail_from_ || *tail_from_ >= level) return g;
    const Index extra = level - *tail_from_;
    Matrix t = Matrix::Zero(level, extra);
    for (Index i = 0; i < extra; ++i) t(*tail_from_ + i, i) = 1.0;
    return linalg::hcat(g, t);
  }

  /// Dimension of the finite part; the full dimension when not cofinite.
  Index finite_rank(const RankPolicy& policy = {}) const { return linalg::rank(basis_, policy); }

  /// Dimension of span ∩ span{e_0..e_{level-1}} for levels past the support bound.
  Index dim_at(Index level, const RankPolicy& policy = {}) const { return linalg::rank(generators(level), policy); }

 private:
  Matrix basis_ = Matrix(0, 0);
  std::optional<Index> tail_from_;
};

struct ComplementedSubspace {
  Subspace span;
  Subspace complement;

  /// Standard coordinate pair (E_n, E^{∞-n}).
  static ComplementedSubspace coordinate(Index n) { return {Subspace::leading(n), Subspace::trailing(n)}; }

  Index support_bound() const { return std::max(span.support_bound(), complement.support_bound()); }
};

/// Rank evidence for span ⊕ complement at one truncation level.
struct ComplementCheck {
  Index level = 0;
  Index span_rank = 0;
  Index complement_rank = 0;
  Index joint_rank = 0;
  bool ok() const { return joint_rank == level && span_rank + complement_rank == level; }
};

inline ComplementCheck check_complement_at(const ComplementedSubspace& c, Index level, const RankPolicy& policy = {}) {
  const Matrix a = c.span.generators(level);
  const Matrix b = c.complement.generators(level);
  return {level, linalg::rank(a, policy), linalg::rank(b, policy), linalg::rank(linalg::hcat(a, b), policy)};
}

/// Direct-sum test at the support bound and five levels beyond.
inline bool is_complemented(const ComplementedSubspace& c, const RankPolicy& policy = {}) {
  const Index l = std::max<Index>(c.support_bound(), 1);
  return check_complement_at(c, l, policy).ok() && check_complement_at(c, l + 5, policy).ok();
}

/// Splits x = a + b with a in span and b in complement.
inline std::pair<Vector, Vector> split(const ComplementedSubspace& c, const Vector& x, const RankPolicy& policy = {}) {
  const Index l = std::max(c.support_bound(), x.size());
  const Matrix a = linalg::range_basis(c.span.generators(l), policy);
  const Matrix b = linalg::range_basis(c.complement.generators(l), policy);
  const Vector coef = linalg::min_norm_solve(linalg::hcat(a, b), linalg::resized(x, l), policy);
  const Vector pa = a.cols() ? Vector(a * coef.head(a.cols())) : Vector(Vector::Zero(l));
  const Vector pb = b.cols() ? Vector(b * coef.tail(b.cols())) : Vector(Vector::Zero(l));
  return {pa, pb};
}

/// Membership of a finite-support vector, by least-squares residual.
inline bool contains(const Subspace& s, const Vector& x, double tol = 1e-9) {
  const Index l = std::max(s.support_bound(), x.size());
  const Matrix g = linalg::range_basis(s.generators(l));
  const Vector xl = linalg::resized(x, l);
  return (xl - linalg::project_onto(g, xl)).norm() <= tol * std::max(1.0, xl.norm());
}

/// Image g(S) for g with zero tail shift on every lane.
inline Subspace image(const SequenceOperator& g, const Subspace& s) {
  for (int sh : g.lane_shifts())
    if (sh != 0) throw DomainError("image of a subspace needs a zero-shift operator");
  const Index w = g.window();
  Matrix cols(std::max(g.row_bound(), s.basis().rows()), 0);
  auto push = [&](const Vector& v) {
    const Index rows = std::max(cols.rows(), v.size());
    Matrix next = linalg::resized_rows(cols, rows);
    next.conservativeResize(rows, next.cols() + 1);
    next.col(next.cols() - 1) = linalg::resized(v, rows);
    cols = next;
  };
  for (Index j = 0; j < s.basis().cols(); ++j) push(g.apply(s.basis().col(j)));
  if (!s.cofinite()) return Subspace(cols);
  const Index t = *s.tail_from();
  for (Index i = t; i < w; ++i) push(g.apply(Vector::Unit(i + 1, i)));
  return Subspace(cols, std::max(t, w));
}

inline ComplementedSubspace image(const SequenceOperator& g, const ComplementedSubspace& c) {
  return {image(g, c.span), image(g, c.complement)};
}

/// Factor 1 on even coordinates, factor 2 on odd ones. Tails must match in
/// kind: both finite or both cofinite.
inline Subspace interleave(const Subspace& a, const Subspace& b) {
  if (a.cofinite() != b.cofinite())
    throw DomainError("interleave: one factor is cofinite and the other is not");
  const Index n = std::max(a.basis().rows(), b.basis().rows());
  Matrix g = Matrix::Zero(2 * n, a.basis().cols() + b.basis().cols());
  for (Index j = 0; j < a.basis().cols(); ++j)
    g.col(j) = seq::interleave(linalg::resized(a.basis().col(j), n), Vector::Zero(n));
  for (Index j = 0; j < b.basis().cols(); ++j)
    g.col(a.basis().cols() + j) = seq::interleave(Vector::Zero(n), linalg::resized(b.basis().col(j), n));
  if (!a.cofinite()) return Subspace(g);
  const Index ta = *a.tail_from(), tb = *b.tail_from();
  const Index t = std::max(ta, tb);
  Matrix extra = Matrix::Zero(2 * t, 0);
  auto add = [&](Index coord) {
    extra.conservativeResize(2 * t, extra.cols() + 1);
    extra.col(extra.cols() - 1) = Vector::Unit(2 * t, coord);
  };
  for (Index i = ta; i < t; ++i) add(2 * i);
  for (Index i = tb; i < t; ++i) add(2 * i + 1);
  const Index rows = std::max(g.rows(), 2 * t);
  return Subspace(linalg::hcat(linalg::resized_rows(g, rows), linalg::resized_rows(extra, rows)), 2 * t);
}

inline ComplementedSubspace interleave(const ComplementedSubspace& a, const ComplementedSubspace& b) {
  return {interleave(a.span, b.span), interleave(a.complement, b.complement)};
}

}  // namespace dnclab
