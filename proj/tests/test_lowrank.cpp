// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "tunecomp/linalg.hpp"
#include "tunecomp/lowrank.hpp"

namespace tunecomp {
namespace {

using test::max_abs_diff;
using test::random_matrix;
using test::to_eigen;

// Splits that carry the singular values; None keeps only the singular vectors.
constexpr SingularSplit kValueSplits[] = {SingularSplit::Left, SingularSplit::Right, SingularSplit::Symmetric};

CalibrationStats stats_of(const Matrix& x) {
  CalibrationStats s(x.rows());
  s.accumulate(x);
  return s;
}

// Calibration activations with per-coordinate scales spread over two decades.
Matrix anisotropic_activations(std::size_t d, std::size_t l, std::uint64_t seed) {
  Matrix x = random_matrix(d, l, seed);
  for (std::size_t i = 0; i < d; ++i) {
    const double s = std::pow(10.0, 2.0 * static_cast<double>(i) / static_cast<double>(d) - 1.0);
    for (std::size_t j = 0; j < l; ++j) x(i, j) *= s;
  }
  return matmul(random_matrix(d, d, seed + 1), x);
}

void expect_orthonormal(const Matrix& q) {
  EXPECT_LE(max_abs_diff(matmul_tn(q, q), Matrix::identity(q.cols())), 1e-12);
}

double eigen_tail_error(const Matrix& w, std::size_t r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> js(to_eigen(w));
  const Eigen::VectorXd s = js.singularValues();
  double tail = 0.0;
  for (Eigen::Index i = static_cast<Eigen::Index>(r); i < s.size(); ++i) tail += s(i) * s(i);
  return std::sqrt(tail);
}

TEST(TruncateSvd, DiagonalTopTwo) {
  const double d[] = {3.0, 2.0, 1.0};
  const Matrix w = Matrix::diagonal(d);
  const LowRankFactor f = truncate_svd(w, 2, SvdBlock::TopR, SingularSplit::Symmetric);
  const double expect[] = {3.0, 2.0, 0.0};
  EXPECT_LE(max_abs_diff(f.product(), Matrix::diagonal(expect)), 1e-15);
  EXPECT_NEAR(approximation_error(w, f), 1.0, 1e-15);
  EXPECT_EQ(f.rank(), 2u);
}

TEST(TruncateSvd, BottomBlockSelectsSmallestValues) {
  const double d[] = {3.0, 2.0, 1.0};
  const LowRankFactor f = truncate_svd(Matrix::diagonal(d), 1, SvdBlock::BottomR, SingularSplit::Right);
  const double expect[] = {0.0, 0.0, 1.0};
  EXPECT_LE(max_abs_diff(f.product(), Matrix::diagonal(expect)), 1e-15);
}

TEST(TruncateSvd, FullRankReconstructs) {
  const Matrix w = random_matrix(5, 7, 3);
  for (SingularSplit split : kValueSplits) {
    EXPECT_LE(approximation_error(w, truncate_svd(w, 5, SvdBlock::TopR, split)), 1e-9);
  }
}

TEST(TruncateSvd, NoneSplitKeepsOnlySingularVectors) {
  const Matrix w = random_matrix(6, 4, 31);
  const SvdResult s = svd(w);
  const LowRankFactor f = truncate_svd(w, 2, SvdBlock::TopR, SingularSplit::None);
  EXPECT_LE(max_abs_diff(f.product(), matmul_nt(column_block(s.U, 0, 2), column_block(s.V, 0, 2))), 1e-12);
  expect_orthonormal(f.B);
}

TEST(TruncateSvd, TailErrorMatchesFullSvdOracle) {
  const Matrix w = random_matrix(8, 6, 21);
  const LowRankFactor f = truncate_svd(w, 3, SvdBlock::TopR, SingularSplit::Symmetric);
  EXPECT_NEAR(approximation_error(w, f), eigen_tail_error(w, 3), 1e-10);
}

TEST(TruncateSvd, SquaredErrorEqualsSingularTail) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = random_matrix(9, 6, seed);
    const SvdResult s = svd(w);
    for (std::size_t r = 1; r <= 6; ++r) {
      double tail = 0.0;
      for (std::size_t i = r; i < 6; ++i) tail += s.S[i] * s.S[i];
      const double e = approximation_error(w, truncate_svd(w, r, SvdBlock::TopR, SingularSplit::Left));
      EXPECT_NEAR(e * e, tail, 1e-8);
    }
  }
}

TEST(TruncateSvd, SplitsShareProduct) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix w = random_matrix(7, 5, seed);
    for (SvdBlock block : {SvdBlock::TopR, SvdBlock::BottomR}) {
      const Matrix ref = truncate_svd(w, 3, block, SingularSplit::Symmetric).product();
      for (SingularSplit split : kValueSplits) {
        EXPECT_LE(max_abs_diff(truncate_svd(w, 3, block, split).product(), ref), 1e-9);
      }
    }
  }
}

TEST(TruncateSvd, BottomNeverBeatsTop) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = random_matrix(8, 8, seed + 40);
    for (std::size_t r = 1; r < 8; ++r) {
      const double top = approximation_error(w, truncate_svd(w, r, SvdBlock::TopR, SingularSplit::Left));
      const double bot = approximation_error(w, truncate_svd(w, r, SvdBlock::BottomR, SingularSplit::Left));
      EXPECT_GE(bot, top - 1e-12);
    }
  }
}

TEST(TruncateSvd, RankOutOfRange) {
  const Matrix w = random_matrix(4, 3, 1);
  EXPECT_THROW(truncate_svd(w, 0, SvdBlock::TopR, SingularSplit::None), std::invalid_argument);
  EXPECT_THROW(truncate_svd(w, 4, SvdBlock::TopR, SingularSplit::None), std::invalid_argument);
}

TEST(EckartYoung, TopRBeatsRandomCompetitors) {
  Rng rng(99);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t m = 2 + rng.below(20), n = 2 + rng.below(16);
    const std::size_t r = 1 + rng.below(std::min<std::size_t>({m, n, 8}));
    const Matrix w = random_matrix(m, n, seed);
    const double best = approximation_error(w, truncate_svd(w, r, SvdBlock::TopR, SingularSplit::Symmetric));
    for (int k = 0; k < 20; ++k) {
      const LowRankFactor c{gaussian(m, r, 1.0, rng), gaussian(r, n, 1.0, rng)};
      EXPECT_LE(best, approximation_error(w, c));
    }
  }
}

TEST(GaussianPair, ZeroBGivesZeroProduct) {
  Rng rng(1);
  const LowRankFactor f = init_gaussian_pair(6, 5, 3, true, rng);
  EXPECT_EQ(f.product(), Matrix(6, 5));
  EXPECT_EQ(f.B, Matrix(6, 3));
}

TEST(GaussianPair, ReproducibleA) {
  Rng a(5), b(5);
  EXPECT_EQ(init_gaussian_pair(6, 5, 3, true, a).A, init_gaussian_pair(6, 5, 3, true, b).A);
}

TEST(GaussianPair, EntryVariances) {
  Rng rng(8);
  const std::size_t d = 100;
  const LowRankFactor f = init_gaussian_pair(d, d, d, false, rng);
  auto variance = [](const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return s / static_cast<double>(m.size());
  };
  EXPECT_NEAR(variance(f.A), 1.0 / d, 0.1 / d);
  EXPECT_NEAR(variance(f.B), 1.0 / d, 0.1 / d);
  EXPECT_TRUE(std::isfinite(frobenius_norm(f.product())));
}

TEST(Nystrom, ZeroProductAtInit) {
  Rng rng(2);
  const Matrix w0 = random_matrix(6, 4, 3);
  const LowRankFactor f = init_nystrom(w0, 2, rng);
  EXPECT_EQ(f.product(), Matrix(6, 4));
  EXPECT_EQ(f.A.rows(), 2u);
  EXPECT_EQ(f.A.cols(), 4u);
}

TEST(Nystrom, ZeroWeightGivesZeroA) {
  Rng rng(2);
  EXPECT_EQ(init_nystrom(Matrix(5, 5), 3, rng).A, Matrix(3, 5));
}

TEST(Nystrom, IdentityWeightReturnsSketch) {
  Rng a(4), b(4);
  const Matrix g = gaussian(3, 5, 1.0 / std::sqrt(5.0), b);
  EXPECT_EQ(init_nystrom(Matrix::identity(5), 3, a).A, g);
}

TEST(Calibration, UnitColumns) {
  CalibrationStats s(2);
  s.accumulate(Matrix{{1}, {0}});
  s.accumulate(Matrix{{0}, {1}});
  EXPECT_EQ(s.cov(), Matrix::identity(2));
  EXPECT_EQ(s.sample_count(), 2u);
}

TEST(Calibration, SplitAccumulationMatchesSinglePass) {
  const Matrix x = random_matrix(5, 40, 6);
  CalibrationStats whole(5), parts(5), left(5), right(5);
  whole.accumulate(x);
  parts.accumulate(column_block(x, 0, 17));
  parts.accumulate(column_block(x, 17, 23));
  left.accumulate(column_block(x, 0, 17));
  right.accumulate(column_block(x, 17, 23));
  left.merge(right);
  EXPECT_LE(max_abs_diff(parts.cov(), whole.cov()), 1e-12);
  EXPECT_LE(max_abs_diff(left.cov(), whole.cov()), 1e-12);
  EXPECT_EQ(left.sample_count(), 40u);
}

TEST(Calibration, CovarianceSymmetricPsd) {
  const CalibrationStats s = stats_of(random_matrix(6, 4, 7));
  EXPECT_LE(max_abs_diff(s.cov(), transpose(s.cov())), 1e-10);
  const SymmetricEigen e = symmetric_eigen(s.cov());
  for (double v : e.values) EXPECT_GE(v, -1e-10 * trace(s.cov()));
}

TEST(Calibration, EmptyAccumulatorRejected) {
  CalibrationStats s(3);
  const Matrix w = random_matrix(2, 3, 1);
  EXPECT_THROW(activation_objective(w, LowRankFactor{Matrix(2, 1), Matrix(1, 3)}, s), std::logic_error);
  EXPECT_THROW(s.regularized_cov(), std::logic_error);
  EXPECT_THROW(s.accumulate(Matrix(2, 4)), DimensionError);
}

TEST(CorDA, IdentityCovarianceIsRightSplitSvd) {
  const Matrix w = random_matrix(6, 5, 10);
  const CalibrationStats s = CalibrationStats::from_parts(Matrix::identity(5), 1);
  const Matrix ref = truncate_svd(w, 2, SvdBlock::TopR, SingularSplit::Right).product();
  EXPECT_LE(max_abs_diff(init_corda(w, s, 2).product(), ref), 1e-8);
  EXPECT_LE(max_abs_diff(init_root_corda(w, s, 2).product(), ref), 1e-8);
}

TEST(CorDA, FullRankReconstructs) {
  const Matrix w = random_matrix(5, 5, 11);
  const CalibrationStats s = stats_of(anisotropic_activations(5, 64, 12));
  EXPECT_LE(max_abs_diff(init_corda(w, s, 5).product(), w), 1e-7);
  EXPECT_LE(max_abs_diff(init_root_corda(w, s, 5).product(), w), 1e-7);
}

// Columns (±10, ±1): XXᵀ = diag(400, 4) over l = 4 samples.
Matrix axis_example() { return Matrix{{10, 10, -10, -10}, {1, -1, 1, -1}}; }

TEST(CorDA, AnisotropicIdentityPicksHeavyAxis) {
  const CalibrationStats s = stats_of(axis_example());
  const double expect[] = {1.0, 0.0};
  EXPECT_LE(max_abs_diff(init_corda(Matrix::identity(2), s, 1).product(), Matrix::diagonal(expect)), 1e-8);
}

TEST(RootCorDA, AxisCandidates) {
  const CalibrationStats s = stats_of(axis_example());
  const Matrix w = Matrix::identity(2);
  const LowRankFactor f = init_root_corda(w, s, 1);
  const double keep_heavy[] = {1.0, 0.0};
  const double keep_light[] = {0.0, 1.0};
  EXPECT_LE(max_abs_diff(f.product(), Matrix::diagonal(keep_heavy)), 1e-8);
  EXPECT_NEAR(activation_objective(w, f, s), 1.0 * 4, 1e-6);
  const LowRankFactor other{Matrix{{0}, {1}}, Matrix{{0, 1}}};
  EXPECT_LE(max_abs_diff(other.product(), Matrix::diagonal(keep_light)), 0.0);
  EXPECT_NEAR(activation_objective(w, other, s), 100.0 * 4, 1e-9);
}

TEST(RootCorDA, NoWorseThanPlainSvd) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = random_matrix(6, 6, seed + 300);
    const CalibrationStats s = stats_of(anisotropic_activations(6, 80, seed + 400));
    for (std::size_t r = 1; r < 6; ++r) {
      const double root = activation_objective(w, init_root_corda(w, s, r), s);
      const double plain = activation_objective(w, truncate_svd(w, r, SvdBlock::TopR, SingularSplit::Symmetric), s);
      EXPECT_LE(root, plain + 1e-9 * std::max(1.0, plain));
    }
  }
}

TEST(RootCorDA, MatchesCholeskyAndBeatsCorDA) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix w = random_matrix(7, 6, seed + 500);
    const CalibrationStats s = stats_of(anisotropic_activations(6, 96, seed + 600));
    const std::size_t r = 1 + seed % 4;
    const double root = activation_objective(w, init_root_corda(w, s, r), s);
    const double chol = activation_objective(w, init_cholesky_whitened(w, s, r), s);
    const double corda = activation_objective(w, init_corda(w, s, r), s);
    EXPECT_NEAR(root, chol, 1e-8 * std::max(1.0, root));
    EXPECT_LT(root, corda);
  }
}

TEST(Whitening, CholeskyInverseWhitens) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = anisotropic_activations(8, 70, seed + 700);
    const Matrix c = cholesky(matmul_nt(x, x));
    const Matrix z = matmul(invert(c), x);
    EXPECT_LE(max_abs_diff(matmul_nt(z, z), Matrix::identity(8)), 1e-6);
  }
}

TEST(ActivationObjective, Examples) {
  const Matrix w = random_matrix(4, 3, 13);
  const CalibrationStats s = stats_of(random_matrix(3, 10, 14));
  const LowRankFactor exact = truncate_svd(w, 3, SvdBlock::TopR, SingularSplit::Symmetric);
  EXPECT_NEAR(activation_objective(w, exact, s), 0.0, 1e-10);

  const CalibrationStats unit = CalibrationStats::from_parts(Matrix::identity(3), 1);
  const LowRankFactor f = truncate_svd(w, 1, SvdBlock::TopR, SingularSplit::Right);
  const double e = approximation_error(w, f);
  EXPECT_NEAR(activation_objective(w, f, unit), e * e, 1e-12);
}

TEST(ActivationObjective, ExplicitSamplesMatchTraceFormula) {
  const Matrix x{{1, 1}, {0, 1}};
  const Matrix w = Matrix::identity(2);
  const LowRankFactor f{Matrix{{1}, {0}}, Matrix{{1, 0}}};
  const double direct = std::pow(frobenius_norm(matmul(subtract(f.product(), w), x)), 2);
  EXPECT_DOUBLE_EQ(direct, 1.0);
  EXPECT_DOUBLE_EQ(activation_objective(w, f, stats_of(x)), 1.0);
}

TEST(InitMenu, ThirteenDistinctRoundTrippingNames) {
  const auto methods = all_init_methods();
  ASSERT_EQ(methods.size(), 13u);
  std::set<std::string> names;
  for (const auto& m : methods) {
    names.insert(to_string(m));
    EXPECT_EQ(parse_init_method(to_string(m)), m);
  }
  EXPECT_EQ(names.size(), 13u);
  EXPECT_TRUE(names.count("svd-top-symmetric"));
  EXPECT_TRUE(names.count("svd-bottom-none"));
  EXPECT_TRUE(names.count("root-corda"));
  EXPECT_THROW(parse_init_method("svd-middle"), std::invalid_argument);
}

TEST(InitMenu, CalibrationRequiredWhereNeeded) {
  Rng rng(1);
  const Matrix w = random_matrix(4, 4, 1);
  EXPECT_THROW(initialize_factor(parse_init_method("corda"), w, 2, nullptr, rng), std::invalid_argument);
  EXPECT_THROW(initialize_factor(parse_init_method("root-corda"), w, 2, nullptr, rng), std::invalid_argument);
  for (const auto& m : all_init_methods()) {
    if (m.needs_calibration()) continue;
    const LowRankFactor f = initialize_factor(m, w, 2, nullptr, rng);
    EXPECT_EQ(f.B.rows(), 4u);
    EXPECT_EQ(f.A.cols(), 4u);
    EXPECT_EQ(f.rank(), 2u);
  }
}

}  // namespace
}  // namespace tunecomp
