#include "dnclab/random.hpp"
#include "dnclab/transversality.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace dnclab;

namespace {

bool same_span(const Subspace& a, const Subspace& b, Index level) {
  const Matrix ga = a.generators(level), gb = b.generators(level);
  const Index ra = oracle::rank(ga), rb = oracle::rank(gb);
  return ra == rb && oracle::rank(linalg::hcat(ga, gb)) == ra;
}

SequenceOperator random_factor(Rng& rng) {
  return SequenceOperator::shift_plus(rng.integer(-2, 2), rng.integer_matrix(4, 4, -1, 1));
}

ComplementedSubspace random_target(Rng& rng) {
  const Index n = rng.integer(1, 5);
  if (rng.integer(0, 1) == 0) return ComplementedSubspace::coordinate(n);
  // Skewed by an invertible unipotent matrix so the subspace is not a coordinate one.
  Matrix u = Matrix::Identity(n + 3, n + 3);
  for (Index i = 0; i < n + 3; ++i)
    for (Index j = i + 1; j < n + 3; ++j) u(i, j) = rng.integer(-1, 1);
  return image(SequenceOperator::identity_plus(u - Matrix::Identity(n + 3, n + 3)),
               ComplementedSubspace::coordinate(n));
}

}  // namespace

TEST(Subspace, CoordinatePairIsComplemented) {
  EXPECT_TRUE(is_complemented(ComplementedSubspace::coordinate(3)));
  EXPECT_FALSE(is_complemented({Subspace::leading(3), Subspace::trailing(2)}));
  EXPECT_FALSE(is_complemented({Subspace::leading(2), Subspace::trailing(3)}));
}

TEST(Subspace, InterleaveOfCoordinatePairs) {
  const ComplementedSubspace c = interleave(ComplementedSubspace::coordinate(1), ComplementedSubspace::coordinate(3));
  EXPECT_EQ(c.span.dim_at(10), 4);
  EXPECT_TRUE(is_complemented(c));
  EXPECT_TRUE(contains(c.span, Vector::Unit(6, 5)));
  EXPECT_FALSE(contains(c.span, Vector::Unit(6, 2)));
}

TEST(Transversality, IdentityIsTransversalToAnything) {
  EXPECT_TRUE(is_transversal(SequenceOperator::identity(), ComplementedSubspace::coordinate(2)));
}

TEST(Transversality, KernelOnLeadingCoordinatesMissesDirection) {
  // T e_0 = T e_1 = 0, T e_i = e_i beyond; V = span{e_0} leaves e_1 uncovered.
  const SequenceOperator t = SequenceOperator::identity_plus(-Matrix::Identity(2, 2));
  const Subspace v = Subspace::leading(1);
  EXPECT_FALSE(is_transversal(t, v));
  EXPECT_FALSE(oracle::transversal(t, v.generators(40)));
  EXPECT_TRUE(is_transversal(t, Subspace::leading(2)));
  EXPECT_THROW(transversality_witness(t, v, Vector::Unit(2, 1)), NotTransversal);
  EXPECT_THROW(preimage_with_complement(t, {v, Subspace::trailing(1)}), NotTransversal);
}

TEST(Transversality, AgreesWithDenseOracle) {
  Rng rng(21);
  int positives = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SequenceOperator t = random_factor(rng);
    const ComplementedSubspace v = random_target(rng);
    const bool got = is_transversal(t, v);
    EXPECT_EQ(got, oracle::transversal(t, v.span.generators(60)));
    positives += got;
  }
  EXPECT_GT(positives, 20);
  EXPECT_LT(positives, 200);
}

TEST(Witness, IdentityExamples) {
  const SequenceOperator id = SequenceOperator::identity();
  const ComplementedSubspace e2 = ComplementedSubspace::coordinate(2);
  const Witness a = transversality_witness(id, e2, Vector::Unit(3, 2));
  EXPECT_EQ(linalg::resized(a.e, 3), Vector::Unit(3, 2));
  EXPECT_EQ(linalg::max_abs(a.v), 0.0);
  const Witness b = transversality_witness(id, e2, Vector::Unit(3, 0));
  EXPECT_EQ(linalg::max_abs(b.e), 0.0);
  EXPECT_NEAR((linalg::resized(b.v, 3) - Vector::Unit(3, 0)).norm(), 0.0, 1e-15);
}

TEST(Witness, ResidualOnRandomTransversalPairs) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const SequenceOperator t = random_factor(rng);
    const ComplementedSubspace v = random_target(rng);
    if (!is_transversal(t, v)) continue;
    const Vector target = rng.normal_vector(rng.integer(1, 12));
    const Witness w = transversality_witness(t, v, target);
    EXPECT_LE(linalg::max_abs(seq::sub(seq::add(t.apply(w.e), w.v), target)), 1e-10);
    EXPECT_TRUE(contains(v.span, w.v));
  }
}

TEST(Preimage, IdentityReturnsCoordinatePair) {
  const ComplementedSubspace c = preimage_with_complement(SequenceOperator::identity(), ComplementedSubspace::coordinate(3));
  EXPECT_TRUE(same_span(c.span, Subspace::leading(3), 12));
  EXPECT_TRUE(same_span(c.complement, Subspace::trailing(3), 12));
}

TEST(Preimage, RotationPullsBackFlag) {
  Matrix k = Matrix::Zero(4, 4);
  k(0, 1) = 1.0;
  k(2, 3) = -2.0;
  k(3, 0) = 1.0;
  const SequenceOperator g = SequenceOperator::identity_plus(k);
  ASSERT_TRUE(is_glk(g));
  const ComplementedSubspace c = preimage_with_complement(g, ComplementedSubspace::coordinate(2));
  // Oracle: columns of the dense inverse restricted to the leading block.
  const Matrix ginv = Matrix(oracle::dense(g, 12, 12)).inverse();
  EXPECT_TRUE(same_span(c.span, Subspace(Matrix(ginv.leftCols(2))), 12));
  EXPECT_TRUE(same_span(c.complement, Subspace(Matrix(ginv.middleCols(2, 10)), 12), 12));
  EXPECT_TRUE(is_complemented(c));
}

TEST(Preimage, NonInvertibleOperatorsGiveComplementedPreimages) {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const SequenceOperator t = random_factor(rng);
    const Index n = rng.integer(0, 3);
    const ComplementedSubspace v =
        rng.integer(0, 1) ? random_target(rng) : ComplementedSubspace{Subspace::trailing(n), Subspace::leading(n)};
    if (!is_transversal(t, v)) continue;
    const ComplementedSubspace c = preimage_with_complement(t, v);
    EXPECT_TRUE(is_complemented(c));
    // Every span generator maps into V.
    const Index l = c.span.support_bound() + 4;
    const Matrix g = c.span.generators(l);
    for (Index j = 0; j < g.cols(); ++j) EXPECT_TRUE(contains(v.span, t.apply(g.col(j)), 1e-8));
  }
}

TEST(BlockTransversality, FactorTransversalityImpliesBlock) {
  Rng rng(31);
  int tested = 0;
  while (tested < 60) {
    const SequenceOperator t1 = random_factor(rng), t2 = random_factor(rng);
    const ComplementedSubspace v1 = random_target(rng), v2 = random_target(rng);
    if (!is_transversal(t1, v1) || !is_transversal(t2, v2)) continue;
    ++tested;
    const BlockOperator b(t1, FiniteRankOperator(rng.integer_matrix(4, 4, -2, 2)), t2);
    EXPECT_TRUE(is_transversal(b, v1, v2));

    const Vector y1 = rng.normal_vector(6), y2 = rng.normal_vector(6);
    const BlockWitness w = block_transversality_witness(b, v1, v2, y1, y2);
    const auto [a1, a2] = b.apply(w.e1, w.e2);
    EXPECT_LE(linalg::max_abs(seq::sub(seq::add(a1, w.v1), y1)), 1e-10);
    EXPECT_LE(linalg::max_abs(seq::sub(seq::add(a2, w.v2), y2)), 1e-10);

    const ComplementedSubspace c = block_preimage_with_complement(b, v1, v2);
    EXPECT_TRUE(is_complemented(c));

    const BlockSplit s = block_decompose(b, v1, v2, y1, y2);
    EXPECT_LE(linalg::max_abs(seq::sub(seq::add(s.u1, s.w1), y1)), 1e-10);
    EXPECT_LE(linalg::max_abs(seq::sub(seq::add(s.u2, s.w2), y2)), 1e-10);
    const auto [b1, b2] = b.apply(s.u1, s.u2);
    EXPECT_TRUE(contains(v1.span, b1, 1e-8));
    EXPECT_TRUE(contains(v2.span, b2, 1e-8));
  }
}

TEST(CompositionLaw, BothDirectionsAgreeWithDirectTest) {
  Rng rng(37);
  int tested = 0, positives = 0;
  while (tested < 80) {
    const SequenceOperator t1 = random_factor(rng), t2 = random_factor(rng);
    const ComplementedSubspace v = random_target(rng);
    if (!is_transversal(t2, v)) continue;
    ++tested;
    const ComplementedSubspace pre = preimage_with_complement(t2, v);
    const bool lhs = is_transversal(t1, pre);
    const bool rhs = is_transversal(compose(t2, t1), v);
    EXPECT_EQ(lhs, rhs);
    EXPECT_EQ(rhs, oracle::transversal(compose(t2, t1), v.span.generators(60)));
    positives += lhs;
  }
  EXPECT_GT(positives, 5);
  EXPECT_LT(positives, 80);
}

TEST(Oracle, MultiLaneTransversalityMatchesSingleLane) {
  Rng rng(71);
  int positives = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const SequenceOperator t = random_factor(rng);
    const ComplementedSubspace v = random_target(rng);
    const Matrix gens = v.span.generators(40);
    const bool single = oracle::transversal(t, gens);
    EXPECT_EQ(oracle::transversal_multi(t, gens, 40), single);
    positives += single;
  }
  EXPECT_GT(positives, 0);
  EXPECT_LT(positives, 60);
}
