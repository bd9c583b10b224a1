// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/model.hpp"

#include <algorithm>
#include <cmath>

namespace tunecomp {

namespace {

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
  Matrix y = matmul(layer.weight, x);
  add_column_broadcast(y, layer.bias);
  return y;
}

// g ⊙ (1 − h²) where h = tanh(·) is the cached activation.
Matrix tanh_backward(const Matrix& grad, const Matrix& activation) {
  Matrix out = grad;
  auto o = out.data();
  auto h = activation.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= 1.0 - h[i] * h[i];
  return out;
}

}  // namespace

void tanh_inplace(Matrix& m) {
  for (double& v : m.data()) v = std::tanh(v);
}

DenseModel::DenseModel(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("DenseModel: need at least two dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    layers_.push_back({gaussian(dims[i + 1], dims[i], stddev, rng), Vector(dims[i + 1], 0.0)});
  }
}

DenseModel::DenseModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("DenseModel: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].weight.rows()) {
      throw DimensionError("DenseModel: bias length mismatch in layer " + std::to_string(i));
    }
    if (i > 0 && layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
      throw DimensionError("DenseModel: layer " + std::to_string(i) + " does not chain");
    }
  }
}

std::vector<std::size_t> DenseModel::dims() const {
  std::vector<std::size_t> d{layers_.front().weight.cols()};
  for (const auto& l : layers_) d.push_back(l.weight.rows());
  return d;
}

Matrix DenseModel::forward(const Matrix& x) {
  inputs_.clear();
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    inputs_.push_back(h);
    h = dense_forward(layers_[i], h);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

Matrix DenseModel::predict(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = dense_forward(layers_[i], h);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

std::vector<Matrix> DenseModel::layer_inputs(const Matrix& x) const {
  std::vector<Matrix> out;
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back(h);
    h = dense_forward(layers_[i], h);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return out;
}

std::vector<DenseGrads> DenseModel::backward(const Matrix& logits_grad) const {
  if (inputs_.size() != layers_.size()) {
    throw std::logic_error("DenseModel::backward: forward() has not been called");
  }
  std::vector<DenseGrads> grads(layers_.size());
  Matrix g = logits_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    grads[i].dW = matmul_nt(g, inputs_[i]);
    grads[i].db = row_sums(g);
    if (i > 0) g = tanh_backward(matmul_tn(layers_[i].weight, g), inputs_[i]);
  }
  return grads;
}

Matrix MaterializedModel::predict(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

Matrix MaterializedModel::predict_dense(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward_dense(h);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

ToyModel::ToyModel(std::vector<DualBranchLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("ToyModel: no layers");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].d_in() != layers_[i - 1].d_out()) {
      throw DimensionError("ToyModel: layer " + std::to_string(i) + " does not chain");
    }
  }
}

ToyModel ToyModel::from_teacher(const DenseModel& teacher, InitMethod method, std::size_t rank,
                                PruneSpec prune, const std::vector<CalibrationStats>* calibration,
                                Rng& rng) {
  if (method.needs_calibration() &&
      (calibration == nullptr || calibration->size() != teacher.layers().size())) {
    throw std::invalid_argument("ToyModel::from_teacher: " + to_string(method) +
                                " needs per-layer calibration statistics");
  }
  std::vector<DualBranchLayer> layers;
  for (std::size_t i = 0; i < teacher.layers().size(); ++i) {
    const DenseLayer& t = teacher.layers()[i];
    const std::size_t r = std::min({rank, t.weight.rows(), t.weight.cols()});
    const CalibrationStats* stats = calibration != nullptr ? &(*calibration)[i] : nullptr;
    LowRankFactor f = initialize_factor(method, t.weight, r, stats, rng);
    layers.emplace_back(t.weight, t.bias, std::move(f), prune);
  }
  return ToyModel(std::move(layers));
}

Matrix ToyModel::forward(const Matrix& x, double alpha, double alpha_prime) {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h, alpha, alpha_prime);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

Matrix ToyModel::predict(const Matrix& x, double alpha, double alpha_prime) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].evaluate(h, alpha, alpha_prime);
    if (i + 1 < layers_.size()) tanh_inplace(h);
  }
  return h;
}

Matrix ToyModel::backpropagate(const OutputGradients& grads, double alpha, double alpha_prime,
                               std::vector<LayerGrads>* out) const {
  const std::size_t n = layers_.size();
  const auto feature_grad = [](const std::vector<Matrix>& v, std::size_t i) -> const Matrix* {
    return i < v.size() && !v[i].empty() ? &v[i] : nullptr;
  };
  if (out != nullptr) out->assign(n, {});
  Matrix g = grads.logits;
  Matrix dx;
  for (std::size_t i = n; i-- > 0;) {
    Matrix teacher_grad = scale(g, alpha);
    Matrix student_grad = scale(g, alpha_prime);
    if (const Matrix* ft = feature_grad(grads.teacher_features, i)) teacher_grad = add(teacher_grad, *ft);
    if (const Matrix* fs = feature_grad(grads.student_features, i)) student_grad = add(student_grad, *fs);
    if (out != nullptr) (*out)[i] = layers_[i].backward_student(student_grad);
    dx = layers_[i].input_gradient_branches(teacher_grad, student_grad);
    // The cached input of layer i is the tanh output of layer i − 1.
    if (i > 0) g = tanh_backward(dx, layers_[i].cached_input());
  }
  return dx;
}

std::vector<LayerGrads> ToyModel::backward(const OutputGradients& grads, double alpha,
                                           double alpha_prime) const {
  std::vector<LayerGrads> out;
  backpropagate(grads, alpha, alpha_prime, &out);
  return out;
}

Matrix ToyModel::input_gradient(const OutputGradients& grads, double alpha,
                                double alpha_prime) const {
  return backpropagate(grads, alpha, alpha_prime, nullptr);
}

MaterializedModel ToyModel::materialize() const {
  std::vector<MaterializedLayer> out;
  for (const auto& l : layers_) out.push_back(l.materialize());
  return MaterializedModel(std::move(out));
}

}  // namespace tunecomp
