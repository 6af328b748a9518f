#include "dnclab/operator.hpp"
#include "dnclab/random.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace dnclab;

namespace {

// Brute force: kernel and cokernel of the rectangular L x (L+s) truncation
// of a single-lane operator, which is exact once L exceeds window + |s|.
std::pair<Index, Index> brute_kernel_cokernel(const SequenceOperator& t, Index level) {
  const Index rows = level + t.tail_shift();
  const Matrix a = oracle::dense(t.lane_shifts(), t.window(), t.block(), rows, level);
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-10);
  const Index r = lu.rank();
  return {level - r, rows - r};
}

SequenceOperator random_glk(Rng& rng, Index n) {
  Matrix k = rng.integer_matrix(n, n, -2, 2);
  Matrix m = Matrix::Identity(n, n) + k;
  while (linalg::inverse_condition(m) < 1e-3) {
    k = rng.integer_matrix(n, n, -2, 2);
    m = Matrix::Identity(n, n) + k;
  }
  return SequenceOperator::identity_plus(k);
}

}  // namespace

TEST(SequenceOperator, IdentityApply) {
  const Vector x = (Vector(3) << 1, 2, 3).finished();
  EXPECT_EQ(SequenceOperator::identity().apply(x).head(3), x);
}

TEST(SequenceOperator, ShiftMovesBasisVector) {
  const Vector y = SequenceOperator::shift(1).apply(Vector::Unit(1, 0));
  EXPECT_EQ(linalg::resized(y, 3), Vector::Unit(3, 1));
}

TEST(SequenceOperator, RankOnePerturbation) {
  const SequenceOperator t = SequenceOperator::identity_plus(Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(linalg::resized(t.apply(Vector::Unit(1, 0)), 2), 2.0 * Vector::Unit(2, 0));
}

TEST(SequenceOperator, CanonicalWindowIsMinimal) {
  Matrix b = Matrix::Identity(6, 5);
  b(0, 0) = 3.0;
  const SequenceOperator t({0}, 5, b);
  EXPECT_EQ(t.window(), 1);
  EXPECT_EQ(t, SequenceOperator::identity_plus(Matrix::Constant(1, 1, 2.0)));
  EXPECT_EQ(SequenceOperator({0}, 4, Matrix::Identity(4, 4)), SequenceOperator::identity());
}

TEST(SequenceOperator, WindowGrowsToCoverBlockRows) {
  Matrix b = Matrix::Zero(7, 1);
  b(6, 0) = 1.0;
  const SequenceOperator t({0}, 1, b);
  EXPECT_GE(t.row_bound(), 7);
  EXPECT_EQ(t.apply(Vector::Unit(1, 0))[6], 1.0);
}

TEST(SequenceOperator, ApplyAndDenseMatchOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int lanes = rng.integer(1, 3);
    std::vector<int> shifts;
    for (int r = 0; r < lanes; ++r) shifts.push_back(rng.integer(-2, 2));
    const SequenceOperator probe(shifts, 0, Matrix(0, 0));
    const Index n = probe.min_valid_window() + rng.integer(0, 4);
    const Matrix block = rng.integer_matrix(probe.row_bound_for(n), n, -3, 3);
    const SequenceOperator t(shifts, n, block);
    const Index cols = 30, rows = 40;
    EXPECT_EQ(t.dense(rows, cols), oracle::dense(shifts, n, block, rows, cols));
    const Vector x = rng.dyadic_vector(12);
    const Vector y = t.apply(x);
    const Vector expected = oracle::dense(shifts, n, block, rows, 12) * x;
    EXPECT_EQ(linalg::resized(y, rows), expected);
  }
}

TEST(SequenceOperator, ShiftCompositionDefect) {
  // shift(+1) after shift(-1) kills e_0 and fixes the rest.
  const SequenceOperator c = compose(SequenceOperator::shift(1), SequenceOperator::shift(-1));
  EXPECT_EQ(c.tail_shift(), 0);
  Matrix expected = Matrix::Identity(30, 30);
  expected(0, 0) = 0.0;
  EXPECT_EQ(c.dense(30, 30), expected);
  EXPECT_EQ(c.window(), 1);
}

TEST(SequenceOperator, ComposeMatchesOracleProduct) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int lanes = rng.integer(1, 2);
    auto random_op = [&] {
      std::vector<int> shifts;
      for (int r = 0; r < lanes; ++r) shifts.push_back(rng.integer(-2, 2));
      const SequenceOperator probe(shifts, 0, Matrix(0, 0));
      const Index n = probe.min_valid_window() + rng.integer(0, 3);
      return SequenceOperator(shifts, n, rng.integer_matrix(probe.row_bound_for(n), n, -2, 2));
    };
    const SequenceOperator t = random_op(), s = random_op();
    const SequenceOperator ts = compose(t, s);
    EXPECT_EQ(ts.tail_shift(), t.tail_shift() + s.tail_shift());
    const Index l = 30;
    const Matrix oracle = t.dense(3 * l, 2 * l) * s.dense(2 * l, l);
    EXPECT_EQ(ts.dense(l, l), oracle.topRows(l));
  }
}

TEST(SequenceOperator, IdentityLawAndPerturbationAlgebra) {
  Rng rng(3);
  const Matrix k1 = rng.integer_matrix(3, 3, -2, 2), k2 = rng.integer_matrix(3, 3, -2, 2);
  const SequenceOperator a = SequenceOperator::identity_plus(k1);
  EXPECT_EQ(compose(SequenceOperator::identity(), a), a);
  EXPECT_EQ(compose(SequenceOperator::identity_plus(k1), SequenceOperator::identity_plus(k2)),
            SequenceOperator::identity_plus(k1 + k2 + k1 * k2));
}

TEST(FredholmIndex, BasicValues) {
  EXPECT_EQ(fredholm_index(SequenceOperator::identity()), 0);
  EXPECT_EQ(fredholm_index(SequenceOperator::shift(1)), -1);
  EXPECT_EQ(fredholm_index(SequenceOperator::shift(-2)), 2);
}

TEST(FredholmIndex, ShiftAgreesWithBruteForce) {
  const SequenceOperator s = SequenceOperator::shift(1);
  for (Index level : {20, 40}) {
    const auto [ker, coker] = brute_kernel_cokernel(s, level);
    EXPECT_EQ(ker, 0);
    EXPECT_EQ(coker, 1);
    EXPECT_EQ(ker - coker, fredholm_index(s));
  }
}

TEST(FredholmIndex, RandomOperatorsAgreeWithBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int s = rng.integer(-3, 3);
    const Matrix k = rng.integer_matrix(4, 4, -1, 1);
    const SequenceOperator t = SequenceOperator::shift_plus(s, k);
    const auto [ker, coker] = brute_kernel_cokernel(t, 30);
    EXPECT_EQ(ker - coker, fredholm_index(t));
    const KernelCokernel kc = kernel_cokernel(t, reduction_level(t));
    EXPECT_EQ(kc.kernel_dim, ker);
    EXPECT_EQ(kc.cokernel_dim, coker);
  }
}

TEST(FredholmIndex, TooSmallLevelIsDetected) {
  // Swap of e_0 and e_7: level 3 sees a kernel that level 8 does not.
  Matrix k = Matrix::Zero(8, 8);
  k(0, 0) = k(7, 7) = -1.0;
  k(7, 0) = k(0, 7) = 1.0;
  const SequenceOperator t = SequenceOperator::identity_plus(k);
  EXPECT_EQ(fredholm_index(t), 0);
  EXPECT_THROW(fredholm_index(t, {.level = 3}), StabilizationFailure);
}

TEST(FredholmIndex, CompositionAddsIndices) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const SequenceOperator a = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator b = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    EXPECT_EQ(fredholm_index(compose(a, b)), fredholm_index(a) + fredholm_index(b));
  }
}

TEST(GLK, Membership) {
  EXPECT_TRUE(is_glk(SequenceOperator::identity()));
  EXPECT_TRUE(is_glk(SequenceOperator::identity_plus(Matrix::Constant(1, 1, 1.0))));
  EXPECT_FALSE(is_glk(SequenceOperator::shift(1)));
  EXPECT_FALSE(is_glk(SequenceOperator::identity_plus(Matrix::Constant(1, 1, -1.0))));
  EXPECT_THROW(inverse(SequenceOperator::shift(1)), NotGLK);
}

TEST(GLK, InverseIsTwoSided) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const SequenceOperator g = random_glk(rng, 4);
    const SequenceOperator gi = inverse(g);
    EXPECT_TRUE(compose(g, gi).approx_equal(SequenceOperator::identity(), 1e-9));
    EXPECT_TRUE(compose(gi, g).approx_equal(SequenceOperator::identity(), 1e-9));
  }
}

TEST(BlockOperator, IdentityBlockFlattensToIdentity) {
  const BlockOperator b = block_lower_triangular(SequenceOperator::identity(), FiniteRankOperator::zero(),
                                                 SequenceOperator::identity());
  EXPECT_EQ(b.flatten(), SequenceOperator::identity(2));
}

TEST(BlockOperator, ApplyMatchesCoordinateFormula) {
  Rng rng(17);
  const SequenceOperator f = SequenceOperator::shift_plus(1, rng.integer_matrix(3, 3, -2, 2));
  const SequenceOperator f2 = SequenceOperator::shift_plus(-1, rng.integer_matrix(3, 3, -2, 2));
  const FiniteRankOperator p(rng.integer_matrix(4, 3, -2, 2));
  const BlockOperator b(f, p, f2);
  const Vector x1 = rng.dyadic_vector(6), x2 = rng.dyadic_vector(6);
  const auto [y1, y2] = b.apply(x1, x2);
  const Vector flat = b.flatten().apply(seq::interleave(x1, x2));
  const auto [z1, z2] = seq::deinterleave(flat);
  EXPECT_EQ(linalg::resized(z1, 12), linalg::resized(y1, 12));
  EXPECT_EQ(linalg::resized(z2, 12), linalg::resized(y2, 12));
  EXPECT_EQ(linalg::resized(y2, 12), linalg::resized(seq::add(p.apply(x1), f2.apply(x2)), 12));
}

TEST(BlockOperator, IndexAdditivity) {
  const BlockOperator b(SequenceOperator::shift(1), FiniteRankOperator::zero(), SequenceOperator::shift(-1));
  EXPECT_EQ(fredholm_index(b.flatten()), 0);
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const SequenceOperator f = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator f2 = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    const BlockOperator bb(f, FiniteRankOperator(rng.integer_matrix(5, 4, -2, 2)), f2);
    EXPECT_EQ(fredholm_index(bb.flatten()), fredholm_index(f) + fredholm_index(f2));
  }
}

TEST(BlockOperator, GlkTilde) {
  const SequenceOperator one_plus = SequenceOperator::identity_plus(Matrix::Constant(1, 1, 1.0));
  EXPECT_TRUE(is_glk_tilde(BlockOperator(SequenceOperator::identity(), FiniteRankOperator::zero(),
                                         SequenceOperator::identity())));
  const BlockOperator b(one_plus, FiniteRankOperator(Matrix::Constant(1, 1, 1.0)), SequenceOperator::identity());
  EXPECT_TRUE(is_glk_tilde(b));
  // Back-substitution: inverse has F^-1 = diag(1/2, 1, ...) and lower block -1/2 e_0 (x) e_0.
  const BlockOperator bi = inverse(b);
  EXPECT_DOUBLE_EQ(bi.f().dense(1, 1)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(bi.p().dense(1, 1)(0, 0), -0.5);
  EXPECT_FALSE(is_glk_tilde(BlockOperator(SequenceOperator::shift(1), FiniteRankOperator::zero(),
                                          SequenceOperator::identity())));
}

TEST(BlockOperator, RetractionPath) {
  const SequenceOperator f = SequenceOperator::identity_plus(Matrix::Constant(1, 1, 1.0));
  const BlockOperator b(f, FiniteRankOperator(Matrix::Constant(1, 1, 3.0)), SequenceOperator::identity());
  EXPECT_EQ(retraction_path(b, 0.0).flatten(), b.flatten());
  const BlockOperator end = retraction_path(b, 1.0);
  EXPECT_EQ(linalg::max_abs(end.p().entries()), 0.0);
  EXPECT_EQ(end.flatten(), BlockOperator(f, FiniteRankOperator::zero(), SequenceOperator::identity()).flatten());
  for (int i = 0; i <= 4; ++i) EXPECT_GE(window_inverse_condition(retraction_path(b, 0.25 * i)), 1e-8);
  EXPECT_THROW(retraction_path(b, 1.5), DomainError);
  EXPECT_THROW(retraction_path(b, -0.1), DomainError);
}

TEST(Oracle, MultiLaneCountsMatchSingleLaneBruteForce) {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const SequenceOperator t = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(4, 4, -1, 1));
    const auto [ker, coker] = brute_kernel_cokernel(t, 30);
    const oracle::FredholmCount c = oracle::fredholm(t, 30);
    EXPECT_EQ(c.kernel, ker);
    EXPECT_EQ(c.cokernel, coker);
  }
}

TEST(Oracle, MultiLaneCountsMatchLibraryOnFlattenedBlocks) {
  Rng rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    const SequenceOperator f = SequenceOperator::shift_plus(rng.integer(-2, 2), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator f2 = SequenceOperator::shift_plus(rng.integer(-2, 2), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator flat = BlockOperator(f, FiniteRankOperator(rng.integer_matrix(3, 3, -2, 2)), f2).flatten();
    const oracle::FredholmCount c = oracle::fredholm(flat, 40);
    const KernelCokernel kc = kernel_cokernel(flat, reduction_level(flat));
    EXPECT_EQ(c.kernel, kc.kernel_dim);
    EXPECT_EQ(c.cokernel, kc.cokernel_dim);
  }
  // Lane shifts (1, -1): one lost row in lane 0, one killed column in lane 1.
  const SequenceOperator mixed = BlockOperator(SequenceOperator::shift(1), FiniteRankOperator::zero(),
                                               SequenceOperator::shift(-1)).flatten();
  EXPECT_EQ(oracle::fredholm(mixed, 20).kernel, 1);
  EXPECT_EQ(oracle::fredholm(mixed, 20).cokernel, 1);
}
