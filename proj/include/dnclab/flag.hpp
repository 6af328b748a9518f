#pragma once

// Δ-flags: nested finite-dimensional subspaces E_n of sequence space with
// dim E_n = δ(n) and decreasing complements E^{∞-n}.

#include "dnclab/condition.hpp"
#include "dnclab/subspace.hpp"

#include <array>
#include <optional>
#include <sstream>

namespace dnclab {

class DimensionSequence {
 public:
  DimensionSequence() = default;
  explicit DimensionSequence(std::vector<Index> delta) : delta_(std::move(delta)) {
    for (std::size_t i = 0; i < delta_.size(); ++i) {
      if (delta_[i] < 1) throw DomainError("dimension sequence entries must be >= 1");
      if (i > 0 && delta_[i] <= delta_[i - 1])
        throw DomainError("dimension sequence must be strictly increasing at position " + std::to_string(i + 1));
    }
  }

  Index depth() const { return static_cast<Index>(delta_.size()); }
  /// 1-based access, matching δ(1), δ(2), ...
  Index operator()(Index n) const { return delta_.at(static_cast<std::size_t>(n - 1)); }
  const std::vector<Index>& values() const { return delta_; }

  friend bool operator==(const DimensionSequence&, const DimensionSequence&) = default;

 private:
  std::vector<Index> delta_;
};

struct Flag {
  DimensionSequence delta;
  std::vector<ComplementedSubspace> subspaces;
  std::optional<SequenceOperator> rotation;

  Index depth() const { return delta.depth(); }
  /// 1-based level access.
  const ComplementedSubspace& level(Index n) const { return subspaces.at(static_cast<std::size_t>(n - 1)); }

  Index support_bound() const {
    Index b = 0;
    for (const auto& s : subspaces) b = std::max(b, s.support_bound());
    return b;
  }
};

inline Flag standard_flag(const DimensionSequence& delta) {
  Flag f{delta, {}, std::nullopt};
  for (Index d : delta.values()) f.subspaces.push_back(ComplementedSubspace::coordinate(d));
  return f;
}

inline Flag rotated_flag(const DimensionSequence& delta, const SequenceOperator& g) {
  if (!is_glk(g)) throw NotGLK("flag rotation must lie in GL_K");
  Flag f{delta, {}, g};
  for (Index d : delta.values()) f.subspaces.push_back(image(g, ComplementedSubspace::coordinate(d)));
  return f;
}

inline ConditionReport verify_flag(const Flag& flag, const RankPolicy& policy = {}) {
  ConditionReport rep;
  const Index depth = flag.depth();
  const Index l1 = flag.support_bound() + 1;
  const std::array<Index, 2> levels{l1, l1 + 5};

  {
    ConditionResult c{"a", Status::pass, "", true};
    std::ostringstream ev;
    if (static_cast<Index>(flag.subspaces.size()) != depth) {
      c.status = Status::fail;
      ev << "subspace count " << flag.subspaces.size() << " != depth " << depth;
    }
    for (Index n = 1; n <= depth && c.status == Status::pass; ++n) {
      const Subspace& e = flag.level(n).span;
      const Index dim = e.cofinite() ? -1 : e.finite_rank(policy);
      ev << "dim E_" << n << "=" << dim << " (delta " << flag.delta(n) << ") ";
      if (dim != flag.delta(n)) c.status = Status::fail;
    }
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }
  if (rep.conditions.back().status == Status::fail && static_cast<Index>(flag.subspaces.size()) != depth) return rep;

  {
    ConditionResult c{"b", Status::pass, "", true};
    std::ostringstream ev;
    for (Index n = 1; n < depth; ++n)
      for (Index l : levels) {
        const Matrix a = flag.level(n).span.generators(l), b = flag.level(n + 1).span.generators(l);
        const Index rb = linalg::rank(b, policy), rab = linalg::rank(linalg::hcat(b, a), policy);
        if (rab != rb) {
          c.status = Status::fail;
          ev << "E_" << n << " not in E_" << n + 1 << " at level " << l << " (rank " << rab << " vs " << rb << ") ";
        }
      }
    if (c.status == Status::pass) ev << "nested at levels " << levels[0] << "," << levels[1];
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }

  rep.conditions.push_back({"c", Status::by_construction, "density holds for finite-support coordinate models", true});

  {
    ConditionResult c{"d", Status::pass, "", true};
    std::ostringstream ev;
    for (Index n = 1; n <= depth; ++n)
      for (Index l : levels) {
        const ComplementCheck k = check_complement_at(flag.level(n), l, policy);
        if (!k.ok()) {
          c.status = Status::fail;
          ev << "E_" << n << " + E^(inf-" << n << ") at level " << l << ": ranks " << k.span_rank << "+"
             << k.complement_rank << ", joint " << k.joint_rank << " ";
        }
      }
    if (c.status == Status::pass) ev << "direct sums span levels " << levels[0] << "," << levels[1];
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }

  {
    ConditionResult c{"e", Status::pass, "", true};
    std::ostringstream ev;
    for (Index n = 1; n < depth; ++n)
      for (Index l : levels) {
        const Matrix a = flag.level(n).complement.generators(l), b = flag.level(n + 1).complement.generators(l);
        const Index ra = linalg::rank(a, policy), rab = linalg::rank(linalg::hcat(a, b), policy);
        if (rab != ra) {
          c.status = Status::fail;
          ev << "complement " << n + 1 << " not in complement " << n << " at level " << l << " ";
        }
      }
    if (c.status == Status::pass) ev << "complements decreasing";
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }
  return rep;
}

/// Levels n_1 < n_2 < ... (1-based) of the original flag.
inline Flag flag_subsequence(const Flag& flag, const std::vector<Index>& indices) {
  std::vector<Index> d;
  Flag out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index n = indices[i];
    if (n < 1 || n > flag.depth()) throw IndexError("index " + std::to_string(n) + " outside 1.." + std::to_string(flag.depth()));
    if (i > 0 && n <= indices[i - 1]) throw IndexError("indices must be strictly increasing");
    d.push_back(flag.delta(n));
    out.subspaces.push_back(flag.level(n));
  }
  out.delta = DimensionSequence(d);
  out.rotation = flag.rotation;
  return out;
}

/// E_n × F_n on the interleaved sum (first factor on even coordinates).
inline Flag flag_product(const Flag& a, const Flag& b) {
  if (a.depth() != b.depth())
    throw DepthMismatch("flag depths " + std::to_string(a.depth()) + " and " + std::to_string(b.depth()));
  std::vector<Index> d;
  Flag out;
  for (Index n = 1; n <= a.depth(); ++n) {
    d.push_back(a.delta(n) + b.delta(n));
    out.subspaces.push_back(interleave(a.level(n), b.level(n)));
  }
  out.delta = DimensionSequence(d);
  return out;
}

/// Moves every coordinate up by one; the new coordinate 0 joins the span
/// when `include` is set.
inline Subspace prepend_coordinate(const Subspace& s, bool include) {
  Matrix b = Matrix::Zero(s.basis().rows() + 1, s.basis().cols());
  b.bottomRows(s.basis().rows()) = s.basis();
  if (include) b = linalg::hcat(Vector::Unit(b.rows(), 0), b);
  std::optional<Index> tail;
  if (s.tail_from()) tail = *s.tail_from() + 1;
  return Subspace(b, tail);
}

/// E_n × E_n × R: coordinate 0 carries the R factor, the rest is the
/// interleaved product flag.
inline Flag flag_groupoid(const Flag& flag) {
  const Flag sq = flag_product(flag, flag);
  std::vector<Index> d;
  Flag out;
  for (Index n = 1; n <= sq.depth(); ++n) {
    d.push_back(sq.delta(n) + 1);
    const ComplementedSubspace& c = sq.level(n);
    out.subspaces.push_back({prepend_coordinate(c.span, true), prepend_coordinate(c.complement, false)});
  }
  out.delta = DimensionSequence(d);
  return out;
}

}  // namespace dnclab
