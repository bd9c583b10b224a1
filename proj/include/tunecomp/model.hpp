// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "tunecomp/layer.hpp"
#include "tunecomp/lowrank.hpp"
#include "tunecomp/matrix.hpp"
#include "tunecomp/pruning.hpp"
#include "tunecomp/rng.hpp"

namespace tunecomp {

struct DenseLayer {
  Matrix weight;  // d_out x d_in
  Vector bias;
};

struct DenseGrads {
  Matrix dW;
  Vector db;
};

/// Plain MLP: linear layers with tanh between them and raw logits out.
class DenseModel {
 public:
  /// Gaussian weights with stddev 1/sqrt(d_in), zero biases.
  DenseModel(const std::vector<std::size_t>& dims, Rng& rng);
  explicit DenseModel(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::vector<std::size_t> dims() const;

  /// Logits; caches layer inputs for backward().
  Matrix forward(const Matrix& x);
  Matrix predict(const Matrix& x) const;
  /// Input of every layer (x itself for the first).
  std::vector<Matrix> layer_inputs(const Matrix& x) const;

  std::vector<DenseGrads> backward(const Matrix& logits_grad) const;

 private:
  std::vector<DenseLayer> layers_;
  std::vector<Matrix> inputs_;
};

/// Student network left once the teacher branches are gone.
class MaterializedModel {
 public:
  explicit MaterializedModel(std::vector<MaterializedLayer> layers) : layers_(std::move(layers)) {}

  const std::vector<MaterializedLayer>& layers() const { return layers_; }
  /// Factored evaluation; bit-identical to the dual-branch network at α = 0, α′ = 1.
  Matrix predict(const Matrix& x) const;
  /// Evaluation through the multiplied-out weights.
  Matrix predict_dense(const Matrix& x) const;

 private:
  std::vector<MaterializedLayer> layers_;
};

/// Gradients of a scalar loss with respect to the network outputs and to
/// each layer's teacher and student branch outputs.
struct OutputGradients {
  Matrix logits;
  std::vector<Matrix> teacher_features;  // empty matrices mean zero
  std::vector<Matrix> student_features;
};

/// MLP whose every linear layer (including the classifier head) is dual-branch.
class ToyModel {
 public:
  explicit ToyModel(std::vector<DualBranchLayer> layers);

  /// Wraps every teacher layer. `calibration` holds per-layer input
  /// statistics and may be null unless the method needs it. Ranks are
  /// clamped to each layer's min(d_out, d_in).
  static ToyModel from_teacher(const DenseModel& teacher, InitMethod method, std::size_t rank,
                               PruneSpec prune, const std::vector<CalibrationStats>* calibration,
                               Rng& rng);

  const std::vector<DualBranchLayer>& layers() const { return layers_; }
  std::vector<DualBranchLayer>& layers() { return layers_; }

  Matrix forward(const Matrix& x, double alpha, double alpha_prime);
  Matrix predict(const Matrix& x, double alpha, double alpha_prime) const;

  std::vector<LayerGrads> backward(const OutputGradients& grads, double alpha,
                                   double alpha_prime) const;
  /// dL/dx for the network input; used by gradient checks.
  Matrix input_gradient(const OutputGradients& grads, double alpha, double alpha_prime) const;

  MaterializedModel materialize() const;

 private:
  // Walks the layers backwards; collects parameter grads and returns dL/dx.
  Matrix backpropagate(const OutputGradients& grads, double alpha, double alpha_prime,
                       std::vector<LayerGrads>* out) const;

  std::vector<DualBranchLayer> layers_;
};

void tanh_inplace(Matrix& m);

}  // namespace tunecomp
