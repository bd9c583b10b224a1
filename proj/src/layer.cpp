// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/layer.hpp"

namespace tunecomp {

namespace {

Matrix blend(const Matrix& teacher, const Matrix& student, double alpha, double alpha_prime) {
  Matrix y(teacher.rows(), teacher.cols());
  auto out = y.data();
  auto t = teacher.data();
  auto s = student.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * t[i] + alpha_prime * s[i];
  return y;
}

Matrix affine(const Matrix& w, const Matrix& x, const Vector& b) {
  Matrix y = matmul(w, x);
  add_column_broadcast(y, b);
  return y;
}

}  // namespace

Matrix MaterializedLayer::forward(const Matrix& x) const {
  Matrix y = matmul(pruned_B, matmul(pruned_A, x));
  add_column_broadcast(y, bias);
  return y;
}

Matrix MaterializedLayer::forward_dense(const Matrix& x) const { return affine(weight, x, bias); }

DualBranchLayer::DualBranchLayer(Matrix teacher_weight, Vector teacher_bias, LowRankFactor factor,
                                 PruneSpec prune)
    : w0_(std::move(teacher_weight)),
      b0_(std::move(teacher_bias)),
      b_mat_(std::move(factor.B)),
      a_(std::move(factor.A)),
      bias_(b0_),
      prune_(prune) {
  if (b0_.size() != w0_.rows()) throw DimensionError("DualBranchLayer: bias length mismatch");
  if (b_mat_.rows() != w0_.rows() || a_.cols() != w0_.cols() || b_mat_.cols() != a_.rows()) {
    throw DimensionError("DualBranchLayer: factor B " + shape_string(b_mat_) + ", A " +
                         shape_string(a_) + " incompatible with W0 " + shape_string(w0_));
  }
}

Matrix DualBranchLayer::forward(const Matrix& x, double alpha, double alpha_prime) {
  if (x.rows() != d_in()) {
    throw DimensionError("DualBranchLayer::forward: input " + shape_string(x) + ", d_in " +
                         std::to_string(d_in()));
  }
  auto [pb, mb] = hard_shrink(b_mat_, prune_);
  auto [pa, ma] = hard_shrink(a_, prune_);
  pruned_b_ = std::move(pb);
  pruned_a_ = std::move(pa);
  mask_b_ = std::move(mb);
  mask_a_ = std::move(ma);
  x_ = x;
  ax_ = matmul(pruned_a_, x);
  student_out_ = matmul(pruned_b_, ax_);
  add_column_broadcast(student_out_, bias_);
  teacher_out_ = affine(w0_, x, b0_);
  cached_ = true;
  return blend(teacher_out_, student_out_, alpha, alpha_prime);
}

Matrix DualBranchLayer::evaluate(const Matrix& x, double alpha, double alpha_prime) const {
  if (x.rows() != d_in()) throw DimensionError("DualBranchLayer::evaluate: input rows mismatch");
  const Matrix pb = hard_shrink(b_mat_, prune_).first;
  const Matrix pa = hard_shrink(a_, prune_).first;
  Matrix student = matmul(pb, matmul(pa, x));
  add_column_broadcast(student, bias_);
  return blend(affine(w0_, x, b0_), student, alpha, alpha_prime);
}

void DualBranchLayer::require_cache(const char* who) const {
  if (!cached_) throw StaleCacheError(std::string(who) + ": forward() has not been called");
}

LayerGrads DualBranchLayer::backward(const Matrix& upstream, double alpha_prime) const {
  return backward_student(scale(upstream, alpha_prime));
}

LayerGrads DualBranchLayer::backward_student(const Matrix& student_grad) const {
  require_cache("DualBranchLayer::backward");
  if (student_grad.rows() != d_out() || student_grad.cols() != x_.cols()) {
    throw DimensionError("DualBranchLayer::backward: gradient " + shape_string(student_grad) +
                         " does not match output " + std::to_string(d_out()) + "x" +
                         std::to_string(x_.cols()));
  }
  LayerGrads g;
  g.dB = mask_gradient(matmul_nt(student_grad, ax_), mask_b_);
  g.dA = mask_gradient(matmul_nt(matmul_tn(pruned_b_, student_grad), x_), mask_a_);
  g.db = row_sums(student_grad);
  return g;
}

Matrix DualBranchLayer::input_gradient(const Matrix& upstream, double alpha,
                                       double alpha_prime) const {
  return input_gradient_branches(scale(upstream, alpha), scale(upstream, alpha_prime));
}

Matrix DualBranchLayer::input_gradient_branches(const Matrix& teacher_grad,
                                                const Matrix& student_grad) const {
  require_cache("DualBranchLayer::input_gradient");
  Matrix dx = matmul_tn(w0_, teacher_grad);
  const Matrix ds = matmul_tn(pruned_a_, matmul_tn(pruned_b_, student_grad));
  return add(dx, ds);
}

MaterializedLayer DualBranchLayer::materialize() const {
  MaterializedLayer m;
  m.pruned_B = hard_shrink(b_mat_, prune_).first;
  m.pruned_A = hard_shrink(a_, prune_).first;
  m.weight = matmul(m.pruned_B, m.pruned_A);
  m.bias = bias_;
  return m;
}

const Matrix& DualBranchLayer::teacher_features() const {
  require_cache("DualBranchLayer::teacher_features");
  return teacher_out_;
}

const Matrix& DualBranchLayer::student_features() const {
  require_cache("DualBranchLayer::student_features");
  return student_out_;
}

const Matrix& DualBranchLayer::cached_input() const {
  require_cache("DualBranchLayer::cached_input");
  return x_;
}

const PruneMask& DualBranchLayer::mask_B() const {
  require_cache("DualBranchLayer::mask_B");
  return mask_b_;
}

const PruneMask& DualBranchLayer::mask_A() const {
  require_cache("DualBranchLayer::mask_A");
  return mask_a_;
}

std::size_t DualBranchLayer::student_parameter_count() const {
  return prune_.kept_count(b_mat_.size()) + prune_.kept_count(a_.size()) + bias_.size();
}

}  // namespace tunecomp
