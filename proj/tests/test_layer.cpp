// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "support.hpp"
#include "tunecomp/layer.hpp"

namespace tunecomp {
namespace {

using test::max_abs_diff;
using test::random_matrix;
using test::rel_err;

DualBranchLayer random_layer(std::uint64_t seed, double rho, std::size_t d_out = 5, std::size_t d_in = 4,
                             std::size_t rank = 3) {
  Rng rng(seed);
  Matrix w0 = gaussian(d_out, d_in, 1.0, rng);
  Vector b0(d_out);
  for (auto& v : b0) v = rng.normal();
  LowRankFactor f{gaussian(d_out, rank, 1.0, rng), gaussian(rank, d_in, 1.0, rng)};
  DualBranchLayer layer(std::move(w0), std::move(b0), std::move(f), PruneSpec(rho));
  for (auto& v : layer.bias()) v += 0.3 * rng.normal();
  return layer;
}

TEST(DualBranchLayer, AlphaOneIsTeacher) {
  DualBranchLayer layer = random_layer(1, 0.4);
  const Matrix x = random_matrix(4, 6, 2);
  Matrix teacher = matmul(layer.teacher_weight(), x);
  add_column_broadcast(teacher, layer.teacher_bias());
  EXPECT_EQ(layer.forward(x, 1.0, 0.0), teacher);
}

TEST(DualBranchLayer, AlphaZeroIsPrunedStudent) {
  DualBranchLayer layer = random_layer(3, 0.4);
  const Matrix x = random_matrix(4, 6, 4);
  const Matrix pb = hard_shrink(layer.B(), layer.prune()).first;
  const Matrix pa = hard_shrink(layer.A(), layer.prune()).first;
  Matrix student = matmul(pb, matmul(pa, x));
  add_column_broadcast(student, layer.bias());
  EXPECT_EQ(layer.forward(x, 0.0, 1.0), student);
}

TEST(DualBranchLayer, BlendOfIdentities) {
  DualBranchLayer layer(Matrix::identity(2), Vector{0, 0},
                        LowRankFactor{Matrix::identity(2), Matrix::identity(2)}, PruneSpec(0.0));
  const Matrix y = layer.forward(Matrix{{1}, {1}}, 0.6, 0.8);
  EXPECT_NEAR(y(0, 0), 1.4, 1e-15);
  EXPECT_NEAR(y(1, 0), 1.4, 1e-15);
}

TEST(DualBranchLayer, StudentBiasCopiesTeacherBias) {
  Rng rng(1);
  DualBranchLayer layer(gaussian(3, 2, 1.0, rng), Vector{1, 2, 3},
                        LowRankFactor{Matrix(3, 1), Matrix(1, 2)}, PruneSpec(0.0));
  EXPECT_EQ(layer.bias(), (Vector{1, 2, 3}));
}

TEST(DualBranchLayer, FeatureCacheReconstructsOutput) {
  DualBranchLayer layer = random_layer(5, 0.4);
  const Matrix x = random_matrix(4, 7, 6);
  const double a = 0.37, ap = std::sqrt(1 - a * a);
  const Matrix y = layer.forward(x, a, ap);
  const Matrix rebuilt = add(scale(layer.teacher_features(), a), scale(layer.student_features(), ap));
  EXPECT_LE(max_abs_diff(y, rebuilt), 1e-12);
  EXPECT_EQ(layer.evaluate(x, a, ap), y);
  EXPECT_EQ(layer.mask_B().kept, PruneSpec(0.4).kept_count(15));
  EXPECT_EQ(layer.mask_A().kept, PruneSpec(0.4).kept_count(12));
}

TEST(DualBranchLayer, PowerConservationWhenBranchesCoincide) {
  // W0 with orthonormal columns, reproduced exactly by B·A.
  const Matrix w0{{0.6, 0.0}, {0.8, 0.0}, {0.0, 1.0}};
  DualBranchLayer layer(w0, Vector(3, 0.0), LowRankFactor{w0, Matrix::identity(2)}, PruneSpec(0.0));
  const Matrix x = random_matrix(2, 5, 7);
  const double ref = frobenius_norm(layer.forward(x, 1.0, 0.0));
  for (double a : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    const double ap = std::sqrt(1.0 - a * a);
    const double n = frobenius_norm(layer.forward(x, a, ap));
    EXPECT_NEAR(n, (a + ap) * ref, 1e-12);
  }
}

TEST(DualBranchLayer, DimensionMismatchRejected) {
  DualBranchLayer layer = random_layer(1, 0.0);
  EXPECT_THROW(layer.forward(Matrix(3, 2), 1.0, 0.0), DimensionError);
  EXPECT_THROW(DualBranchLayer(Matrix(3, 2), Vector(2), LowRankFactor{Matrix(3, 1), Matrix(1, 2)}, PruneSpec(0)),
               DimensionError);
  EXPECT_THROW(DualBranchLayer(Matrix(3, 2), Vector(3), LowRankFactor{Matrix(3, 1), Matrix(1, 3)}, PruneSpec(0)),
               DimensionError);
}

TEST(DualBranchLayer, StaleCacheRejected) {
  const DualBranchLayer layer = random_layer(1, 0.0);
  EXPECT_FALSE(layer.has_cache());
  EXPECT_THROW(layer.backward(Matrix(5, 1), 1.0), StaleCacheError);
  EXPECT_THROW(layer.input_gradient(Matrix(5, 1), 1.0, 0.0), StaleCacheError);
  EXPECT_THROW(layer.teacher_features(), StaleCacheError);
}

TEST(Backward, ZeroStudentWeightGivesZeroGrads) {
  DualBranchLayer layer = random_layer(2, 0.4);
  layer.forward(random_matrix(4, 3, 1), 1.0, 0.0);
  const LayerGrads g = layer.backward(random_matrix(5, 3, 2), 0.0);
  EXPECT_EQ(g.dB, Matrix(5, 3));
  EXPECT_EQ(g.dA, Matrix(3, 4));
  EXPECT_EQ(g.db, Vector(5, 0.0));
}

TEST(Backward, FullPruningLeavesBiasGradient) {
  DualBranchLayer layer = random_layer(2, 1.0);
  layer.forward(random_matrix(4, 3, 1), 0.0, 1.0);
  const Matrix up = random_matrix(5, 3, 2);
  const LayerGrads g = layer.backward(up, 1.0);
  EXPECT_EQ(g.dB, Matrix(5, 3));
  EXPECT_EQ(g.dA, Matrix(3, 4));
  EXPECT_EQ(g.db, row_sums(up));
}

TEST(Backward, PrunedPositionsGetZeroGradient) {
  DualBranchLayer layer = random_layer(9, 0.4);
  layer.forward(random_matrix(4, 3, 1), 0.3, 0.9);
  const LayerGrads g = layer.backward(random_matrix(5, 3, 2), 0.9);
  for (std::size_t i = 0; i < g.dB.size(); ++i) {
    if (!layer.mask_B().kept_at(i)) {
      EXPECT_EQ(g.dB.data()[i], 0.0);
    }
  }
  for (std::size_t i = 0; i < g.dA.size(); ++i) {
    if (!layer.mask_A().kept_at(i)) {
      EXPECT_EQ(g.dA.data()[i], 0.0);
    }
  }
}

// Central differences of L = Σ R ⊙ forward(X) with the masks from the
// unperturbed forward held fixed.
struct GradcheckResult {
  double worst = 0.0;
  std::size_t checked = 0;
};

GradcheckResult gradcheck_layer(std::uint64_t seed, double rho) {
  const double h = 1e-6;
  DualBranchLayer layer = random_layer(seed, rho, 6, 5, 3);
  Matrix x = random_matrix(5, 4, seed + 1000);
  const Matrix r = random_matrix(6, 4, seed + 2000);
  const double a = 0.45, ap = std::sqrt(1 - a * a);

  layer.forward(x, a, ap);
  const PruneMask mb = layer.mask_B(), ma = layer.mask_A();
  const LayerGrads g = layer.backward(r, ap);
  const Matrix dx = layer.input_gradient(r, a, ap);

  auto loss = [&](const DualBranchLayer& l, const Matrix& in) {
    // Masks are recomputed inside evaluate; perturbations never cross a
    // pruning threshold at this step size, which the mask check confirms.
    const Matrix y = l.evaluate(in, a, ap);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * r.data()[i];
    return s;
  };
  auto same_masks = [&](const DualBranchLayer& l) {
    return hard_shrink(l.B(), l.prune()).second.keep == mb.keep &&
           hard_shrink(l.A(), l.prune()).second.keep == ma.keep;
  };

  GradcheckResult res;
  auto probe = [&](double& param, double analytic, const std::function<double()>& eval,
                   const std::function<bool()>& masks_ok) {
    const double orig = param;
    param = orig + h;
    const double up = eval();
    const bool ok_up = masks_ok();
    param = orig - h;
    const double down = eval();
    const bool ok_down = masks_ok();
    param = orig;
    EXPECT_TRUE(ok_up && ok_down) << "mask changed under perturbation";
    res.worst = std::max(res.worst, rel_err(analytic, (up - down) / (2 * h)));
    ++res.checked;
  };
  auto eval_layer = [&] { return loss(layer, x); };
  auto masks = [&] { return same_masks(layer); };
  for (std::size_t i = 0; i < layer.B().size(); ++i) probe(layer.B().data()[i], g.dB.data()[i], eval_layer, masks);
  for (std::size_t i = 0; i < layer.A().size(); ++i) probe(layer.A().data()[i], g.dA.data()[i], eval_layer, masks);
  for (std::size_t i = 0; i < layer.bias().size(); ++i) probe(layer.bias()[i], g.db[i], eval_layer, masks);
  for (std::size_t i = 0; i < x.size(); ++i) probe(x.data()[i], dx.data()[i], eval_layer, [] { return true; });
  return res;
}

TEST(Gradcheck, LayerMatchesCentralDifferences) {
  for (double rho : {0.0, 0.4}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const GradcheckResult r = gradcheck_layer(seed, rho);
      EXPECT_LT(r.worst, 1e-4) << "seed " << seed << " rho " << rho;
      EXPECT_EQ(r.checked, 6u * 3 + 3 * 5 + 6 + 5 * 4);
    }
  }
}

TEST(InputGradient, Examples) {
  DualBranchLayer teacher_only(Matrix::identity(3), Vector(3, 0.0),
                               LowRankFactor{random_matrix(3, 2, 1), random_matrix(2, 3, 2)}, PruneSpec(0.0));
  teacher_only.forward(random_matrix(3, 4, 3), 1.0, 0.0);
  const Matrix g = random_matrix(3, 4, 4);
  EXPECT_EQ(teacher_only.input_gradient(g, 1.0, 0.0), g);

  DualBranchLayer zero_student(random_matrix(3, 3, 5), Vector(3, 0.0),
                               LowRankFactor{Matrix(3, 2), random_matrix(2, 3, 6)}, PruneSpec(0.0));
  zero_student.forward(random_matrix(3, 4, 7), 0.0, 1.0);
  EXPECT_EQ(zero_student.input_gradient(g, 0.0, 1.0), Matrix(3, 4));
}

TEST(InputGradient, BranchFormMatchesBlendedForm) {
  DualBranchLayer layer = random_layer(4, 0.4);
  layer.forward(random_matrix(4, 3, 8), 0.6, 0.8);
  const Matrix g = random_matrix(5, 3, 9);
  const Matrix blended = layer.input_gradient(g, 0.6, 0.8);
  const Matrix branches = layer.input_gradient_branches(scale(g, 0.6), scale(g, 0.8));
  EXPECT_LE(max_abs_diff(blended, branches), 1e-14);
  const Matrix w = add(scale(layer.teacher_weight(), 0.6), scale(layer.materialize().weight, 0.8));
  EXPECT_LE(max_abs_diff(blended, matmul_tn(w, g)), 1e-12);
}

TEST(Materialize, Examples) {
  DualBranchLayer exact(Matrix::identity(3), Vector{1, 2, 3},
                        LowRankFactor{Matrix::identity(3), Matrix::identity(3)}, PruneSpec(0.0));
  const MaterializedLayer m = exact.materialize();
  EXPECT_EQ(m.weight, Matrix::identity(3));
  EXPECT_EQ(m.bias, (Vector{1, 2, 3}));

  const MaterializedLayer empty = random_layer(1, 1.0).materialize();
  EXPECT_EQ(empty.weight, Matrix(5, 4));
  EXPECT_EQ(empty.forward(random_matrix(4, 2, 1)).cols(), 2u);
}

TEST(Materialize, MatchesStudentForward) {
  DualBranchLayer layer = random_layer(6, 0.4);
  const MaterializedLayer m = layer.materialize();
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix x = random_matrix(4, 3, s + 50);
    const Matrix y = layer.forward(x, 0.0, 1.0);
    EXPECT_LE(max_abs_diff(m.forward(x), y), 1e-12);
    EXPECT_LE(max_abs_diff(m.forward_dense(x), y), 1e-12);
  }
}

TEST(ParameterCounts, KeptEntriesPlusBias) {
  const DualBranchLayer layer = random_layer(1, 0.5, 4, 4, 2);
  EXPECT_EQ(layer.student_parameter_count(), 4u + 4u + 4u);
  EXPECT_EQ(layer.dense_parameter_count(), 20u);
}

}  // namespace
}  // namespace tunecomp
