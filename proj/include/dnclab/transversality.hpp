#pragma once

// Linear transversality of a model operator to a complemented subspace of
// its codomain, decided on finite reductions and made constructive through
// witnesses and preimage complements.

#include "dnclab/subspace.hpp"

namespace dnclab {

struct TransversalityOptions {
  /// Reduction level; 0 selects the smallest level that contains both the
  /// operator window and the subspace support.
  Index level = 0;
  RankPolicy policy{};
};

/// Finite reduction at level L: the operator block on e_0..e_{L-1} and the
/// subspace generators, both restricted to the codomain coordinates the
/// tail does not reach.
struct Reduction {
  Index level = 0;
  std::vector<Index> rows;
  Matrix t;
  Matrix v;
};

inline Index transversality_level(const SequenceOperator& t, const Subspace& v, Index requested = 0,
                                  Index extra_support = 0) {
  const Index k = t.lanes();
  const Index need = std::max({reduction_level(t), v.support_bound() - k * t.min_shift(),
                               extra_support - k * t.min_shift(), requested});
  return detail::round_up(std::max<Index>(need, 1), k);
}

inline Reduction reduce(const SequenceOperator& t, const Subspace& v, Index level) {
  Reduction r;
  r.level = level;
  r.rows = finite_codomain(t, level);
  r.t = finite_part(t, level, r.rows);
  Index top = 1;
  for (Index i : r.rows) top = std::max(top, i + 1);
  const Matrix g = v.generators(top);
  r.v = Matrix(static_cast<Index>(r.rows.size()), g.cols());
  for (std::size_t i = 0; i < r.rows.size(); ++i) r.v.row(static_cast<Index>(i)) = g.row(r.rows[i]);
  return r;
}

namespace detail {

inline bool reduction_transversal(const Reduction& r, const RankPolicy& policy) {
  const Index n = static_cast<Index>(r.rows.size());
  if (n == 0) return true;
  return linalg::rank(linalg::hcat(r.t, r.v), policy) == n;
}

inline Vector lift_rows(const Reduction& r, const Vector& x) {
  Index top = 0;
  for (Index i : r.rows) top = std::max(top, i + 1);
  Vector out = Vector::Zero(top);
  for (std::size_t i = 0; i < r.rows.size(); ++i) out[r.rows[i]] = x[static_cast<Index>(i)];
  return out;
}

inline Vector restrict_rows(const Reduction& r, const Vector& x) {
  Vector out(static_cast<Index>(r.rows.size()));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const Index row = r.rows[i];
    out[static_cast<Index>(i)] = row < x.size() ? x[row] : 0.0;
  }
  return out;
}

}  // namespace detail

/// im(T) + V = codomain, decided at levels L and L+5.
inline bool is_transversal(const SequenceOperator& t, const Subspace& v, const TransversalityOptions& opts = {}) {
  const Index l1 = transversality_level(t, v, opts.level);
  const Index l2 = detail::round_up(l1 + 5, t.lanes());
  const bool a = detail::reduction_transversal(reduce(t, v, l1), opts.policy);
  const bool b = detail::reduction_transversal(reduce(t, v, l2), opts.policy);
  if (a != b)
    throw StabilizationFailure("transversality differs between levels " + std::to_string(l1) + " and " +
                               std::to_string(l2));
  return a;
}

inline bool is_transversal(const SequenceOperator& t, const ComplementedSubspace& v,
                           const TransversalityOptions& opts = {}) {
  return is_transversal(t, v.span, opts);
}

struct Witness {
  Vector e;
  Vector v;
};

/// Decomposes e' = T e + v with v ∈ V. The V-component is taken first as the
/// orthogonal projection of e' onto V; the rest is the minimum-norm solution
/// for e. Any remainder outside im(T) + proj is absorbed by a joint
/// minimum-norm correction on [T | V].
inline Witness transversality_witness(const SequenceOperator& t, const Subspace& v, const Vector& target,
                                      const TransversalityOptions& opts = {}) {
  if (!is_transversal(t, v, opts)) throw NotTransversal("operator is not transversal to the subspace");
  const Index level = transversality_level(t, v, opts.level, target.size());
  const Reduction r = reduce(t, v, level);
  const Vector y = detail::restrict_rows(r, target);
  const Matrix qv = linalg::range_basis(r.v, opts.policy);
  Vector vv = linalg::project_onto(qv, y);
  Vector e = r.t.cols() ? linalg::min_norm_solve(r.t, y - vv, opts.policy) : Vector(0);
  Vector res = y - vv - (r.t.cols() ? Vector(r.t * e) : Vector(Vector::Zero(y.size())));
  if (res.norm() > 1e-12 * std::max(1.0, y.norm())) {
    const Matrix a = linalg::hcat(r.t, qv);
    const Vector c = linalg::min_norm_solve(a, res, opts.policy);
    e += c.head(r.t.cols());
    vv += qv * c.tail(qv.cols());
  }
  Witness w{e, detail::lift_rows(r, vv)};
  const Vector check = seq::sub(seq::add(t.apply(w.e), w.v), target);
  if (linalg::max_abs(check) > 1e-10 * std::max(1.0, linalg::max_abs(target)))
    throw NotTransversal("witness residual " + std::to_string(linalg::max_abs(check)));
  return w;
}

inline Witness transversality_witness(const SequenceOperator& t, const ComplementedSubspace& v, const Vector& target,
                                      const TransversalityOptions& opts = {}) {
  return transversality_witness(t, v.span, target, opts);
}

/// T^{-1}(V) with a complement. For T in GL_K the complement is the preimage
/// of V's complement; otherwise it is the orthogonal complement of the
/// finite part, with the tail assigned to whichever side does not hold it.
inline ComplementedSubspace preimage_with_complement(const SequenceOperator& t, const ComplementedSubspace& v,
                                                     const TransversalityOptions& opts = {}) {
  if (!is_transversal(t, v.span, opts)) throw NotTransversal("operator is not transversal to the subspace");
  if (is_glk(t, opts.policy)) return image(inverse(t, opts.policy), v);

  const Index level = transversality_level(t, v.span, opts.level);
  const Reduction r = reduce(t, v.span, level);
  const Matrix n = linalg::null_basis(linalg::hcat(r.t, -r.v), opts.policy);
  const Matrix k = linalg::range_basis(Matrix(n.topRows(level)), opts.policy);
  const Matrix w = linalg::orthogonal_complement(k, opts.policy);
  ComplementedSubspace out;
  if (v.span.cofinite()) {
    out.span = Subspace(k, level);
    out.complement = Subspace(w);
  } else {
    out.span = Subspace(k);
    out.complement = Subspace(w, level);
  }
  if (!is_complemented(out, opts.policy)) throw StabilizationFailure("preimage complement failed the rank test");
  return out;
}

// ---------------------------------------------------------------------------
// Block operators

inline bool is_transversal(const BlockOperator& b, const ComplementedSubspace& v1, const ComplementedSubspace& v2,
                           const TransversalityOptions& opts = {}) {
  return is_transversal(b.flatten(), interleave(v1.span, v2.span), opts);
}

struct BlockWitness {
  Vector e1, e2;
  Vector v1, v2;
};

/// Witness following the factorwise construction: solve each factor, then
/// push the lower-left contribution P e1 through a second factor-2 witness
/// and subtract it.
inline BlockWitness block_transversality_witness(const BlockOperator& b, const ComplementedSubspace& v1,
                                                 const ComplementedSubspace& v2, const Vector& t1, const Vector& t2,
                                                 const TransversalityOptions& opts = {}) {
  if (!is_transversal(b.f(), v1.span, opts) || !is_transversal(b.f2(), v2.span, opts))
    throw NotTransversal("block witness needs transversal diagonal factors");
  const Witness w1 = transversality_witness(b.f(), v1.span, t1, opts);
  const Witness w2 = transversality_witness(b.f2(), v2.span, t2, opts);
  const Witness corr = transversality_witness(b.f2(), v2.span, b.p().apply(w1.e), opts);
  return {w1.e, seq::sub(w2.e, corr.e), w1.v, seq::sub(w2.v, corr.v)};
}

/// (u, w) with (x1, x2) = u + w, u ∈ T^{-1}(V1 ⊕ V2) and w in the product of
/// the factor complements.
struct BlockSplit {
  Vector u1, u2;
  Vector w1, w2;
};

inline BlockSplit block_decompose(const BlockOperator& b, const ComplementedSubspace& v1,
                                  const ComplementedSubspace& v2, const Vector& x1, const Vector& x2,
                                  const TransversalityOptions& opts = {}) {
  const ComplementedSubspace c1 = preimage_with_complement(b.f(), v1, opts);
  const ComplementedSubspace c2 = preimage_with_complement(b.f2(), v2, opts);
  const auto [u1, w1] = split(c1, x1, opts.policy);
  // P(u1) = T2(u) + v with v ∈ V2; then x2 + u splits along T2^{-1}(V2) ⊕ W2.
  const Witness pw = transversality_witness(b.f2(), v2.span, b.p().apply(u1), opts);
  const auto [y, w2] = split(c2, seq::add(x2, pw.e), opts.policy);
  return {u1, seq::sub(y, pw.e), w1, w2};
}

/// T^{-1}(V1 ⊕ V2) paired with W1 ⊕ W2, the product of the factor complements.
inline ComplementedSubspace block_preimage_with_complement(const BlockOperator& b, const ComplementedSubspace& v1,
                                                           const ComplementedSubspace& v2,
                                                           const TransversalityOptions& opts = {}) {
  const SequenceOperator flat = b.flatten();
  const ComplementedSubspace v = interleave(v1, v2);
  if (!is_transversal(b.f(), v1.span, opts) || !is_transversal(b.f2(), v2.span, opts))
    return preimage_with_complement(flat, v, opts);
  const ComplementedSubspace c1 = preimage_with_complement(b.f(), v1, opts);
  const ComplementedSubspace c2 = preimage_with_complement(b.f2(), v2, opts);
  ComplementedSubspace out;
  out.span = preimage_with_complement(flat, v, opts).span;
  out.complement = interleave(c1.complement, c2.complement);
  if (!is_complemented(out, opts.policy))
    throw StabilizationFailure("product of factor complements does not complement the block preimage");
  return out;
}

}  // namespace dnclab
