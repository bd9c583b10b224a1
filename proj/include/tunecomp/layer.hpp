// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "tunecomp/lowrank.hpp"
#include "tunecomp/matrix.hpp"
#include "tunecomp/pruning.hpp"

namespace tunecomp {

class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LayerGrads {
  Matrix dB;
  Matrix dA;
  Vector db;
};

/// Student-only linear layer left after the teacher has decayed away.
struct MaterializedLayer {
  Matrix weight;  // prune(B)·prune(A)
  Vector bias;
  Matrix pruned_B;
  Matrix pruned_A;

  /// prune(B)·(prune(A)·X) + b, the same evaluation order as the dual-branch student.
  Matrix forward(const Matrix& x) const;
  /// weight·X + b.
  Matrix forward_dense(const Matrix& x) const;
};

/// Linear layer with a frozen teacher branch (W₀, b₀) and a trainable pruned
/// low-rank student branch (B, A, b):
///
///   Y = α·(W₀X + b₀) + α′·(prune(B)·prune(A)·X + b)
///
/// Masks are recomputed on every forward and held fixed until the next one,
/// so a forward/backward pair sees a single consistent sparsity pattern.
class DualBranchLayer {
 public:
  /// The student bias starts as a copy of b₀.
  DualBranchLayer(Matrix teacher_weight, Vector teacher_bias, LowRankFactor factor,
                  PruneSpec prune);

  std::size_t d_in() const { return w0_.cols(); }
  std::size_t d_out() const { return w0_.rows(); }
  std::size_t rank() const { return a_.rows(); }

  const Matrix& teacher_weight() const { return w0_; }
  const Vector& teacher_bias() const { return b0_; }
  const Matrix& B() const { return b_mat_; }
  const Matrix& A() const { return a_; }
  const Vector& bias() const { return bias_; }
  Matrix& B() { return b_mat_; }
  Matrix& A() { return a_; }
  Vector& bias() { return bias_; }
  const PruneSpec& prune() const { return prune_; }

  Matrix forward(const Matrix& x, double alpha, double alpha_prime);
  /// Same value as forward() without touching the cache.
  Matrix evaluate(const Matrix& x, double alpha, double alpha_prime) const;

  /// Gradients of the trainable parameters given dL/dY.
  LayerGrads backward(const Matrix& upstream, double alpha_prime) const;
  /// Gradients given dL/dF_s directly, for losses that also touch the student branch.
  LayerGrads backward_student(const Matrix& student_grad) const;

  /// dL/dX given dL/dY.
  Matrix input_gradient(const Matrix& upstream, double alpha, double alpha_prime) const;
  /// dL/dX given separate gradients on the teacher and student branch outputs.
  Matrix input_gradient_branches(const Matrix& teacher_grad, const Matrix& student_grad) const;

  MaterializedLayer materialize() const;

  bool has_cache() const { return cached_; }
  const Matrix& teacher_features() const;
  const Matrix& student_features() const;
  const Matrix& cached_input() const;
  const PruneMask& mask_B() const;
  const PruneMask& mask_A() const;

  /// Stored student parameters after pruning: kept(B) + kept(A) + len(b).
  std::size_t student_parameter_count() const;
  /// d_out·d_in + d_out.
  std::size_t dense_parameter_count() const { return w0_.size() + b0_.size(); }

 private:
  void require_cache(const char* who) const;

  Matrix w0_;
  Vector b0_;
  Matrix b_mat_;
  Matrix a_;
  Vector bias_;
  PruneSpec prune_;

  bool cached_ = false;
  Matrix x_;
  Matrix pruned_b_;
  Matrix pruned_a_;
  PruneMask mask_b_;
  PruneMask mask_a_;
  Matrix ax_;
  Matrix teacher_out_;
  Matrix student_out_;
};

}  // namespace tunecomp
