// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tunecomp {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NonFiniteError(std::string("non-finite gradient in ") + what);
}

void check_loss(double value, std::size_t step) {
  if (!std::isfinite(value)) {
    throw TrainingDiverged("loss became " + std::to_string(value) + " at step " +
                           std::to_string(step));
  }
}

}  // namespace

double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad) {
  const std::size_t n = logits.cols();
  const std::size_t classes = logits.rows();
  if (labels.size() != n) throw DimensionError("cross_entropy: label count mismatch");
  if (n == 0) throw std::invalid_argument("cross_entropy: empty batch");
  if (grad != nullptr) *grad = Matrix(classes, n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const int label = labels[j];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(label) + " out of range");
    }
    double peak = logits(0, j);
    for (std::size_t c = 1; c < classes; ++c) peak = std::max(peak, logits(c, j));
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(logits(c, j) - peak);
    const double log_denom = std::log(denom);
    total += log_denom - (logits(static_cast<std::size_t>(label), j) - peak);
    if (grad != nullptr) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double p = std::exp(logits(c, j) - peak - log_denom);
        (*grad)(c, j) = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) / static_cast<double>(n);
      }
    }
  }
  return total / static_cast<double>(n);
}

double mse(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DimensionError("mse: shape mismatch");
  if (a.empty()) return 0.0;
  double s = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

LossBreakdown compute_loss(const ToyModel& model, const Matrix& logits,
                           std::span<const int> labels, double gamma, double task_weight,
                           OutputGradients* grads, bool detach_teacher) {
  LossBreakdown out;
  out.gamma = gamma;
  out.task_weight = task_weight;
  Matrix task_grad;
  out.task_loss = cross_entropy(logits, labels, grads != nullptr ? &task_grad : nullptr);

  const auto& layers = model.layers();
  const double m = static_cast<double>(layers.size());
  if (grads != nullptr) {
    grads->logits = scale(task_grad, task_weight);
    grads->teacher_features.assign(layers.size(), Matrix());
    grads->student_features.assign(layers.size(), Matrix());
  }
  double feat = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Matrix& ft = layers[i].teacher_features();
    const Matrix& fs = layers[i].student_features();
    feat += mse(ft, fs);
    if (grads != nullptr && gamma != 0.0) {
      // d/dF_t of (γ/m)·mean((F_t − F_s)²) and its negation for F_s.
      const double coeff = 2.0 * gamma / (m * static_cast<double>(ft.size()));
      Matrix diff = scale(subtract(ft, fs), coeff);
      grads->student_features[i] = scale(diff, -1.0);
      if (!detach_teacher) grads->teacher_features[i] = std::move(diff);
    }
  }
  out.feat_loss = feat / m;
  out.total = task_weight * out.task_loss + gamma * out.feat_loss;
  return out;
}

void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum) {
  if (!param.same_shape(grad)) throw DimensionError("sgd_step: gradient shape mismatch");
  require_finite(grad, "sgd_step");
  if (!velocity.same_shape(param)) velocity = Matrix(param.rows(), param.cols());
  auto p = param.data();
  auto g = grad.data();
  auto v = velocity.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = momentum * v[i] + g[i];
    p[i] -= lr * v[i];
  }
}

void sgd_step(Vector& param, const Vector& grad, Vector& velocity, double lr, double momentum) {
  if (param.size() != grad.size()) throw DimensionError("sgd_step: gradient length mismatch");
  for (double x : grad)
    if (!std::isfinite(x)) throw NonFiniteError("non-finite gradient in sgd_step");
  if (velocity.size() != param.size()) velocity.assign(param.size(), 0.0);
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i];
    param[i] -= lr * velocity[i];
  }
}

BatchSampler::BatchSampler(const Dataset& data, std::size_t batch_size, Rng rng)
    : data_(&data), batch_size_(std::min(batch_size, data.size())), rng_(rng), order_(data.size()) {
  if (data.size() == 0 || batch_size == 0) {
    throw std::invalid_argument("BatchSampler: empty dataset or zero batch size");
  }
  std::iota(order_.begin(), order_.end(), 0);
  cursor_ = order_.size();
}

Dataset BatchSampler::next() {
  if (cursor_ + batch_size_ > order_.size()) {
    // Fisher-Yates with the generator's own integer draws, for portability.
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[rng_.below(i)]);
    }
    cursor_ = 0;
  }
  std::vector<std::size_t> idx(order_.begin() + static_cast<long>(cursor_),
                               order_.begin() + static_cast<long>(cursor_ + batch_size_));
  cursor_ += batch_size_;
  return data_->gather(idx);
}

std::vector<double> train_dense(DenseModel& model, const Dataset& data,
                                const DenseTrainConfig& config, Rng& rng) {
  config.lr.validate();
  BatchSampler sampler(data, config.batch_size, rng.fork(1));
  std::vector<DenseGrads> velocity(model.layers().size());
  std::vector<double> losses;
  losses.reserve(config.iterations);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    const Dataset batch = sampler.next();
    const Matrix logits = model.forward(batch.inputs);
    Matrix grad;
    const double loss = cross_entropy(logits, batch.labels, &grad);
    check_loss(loss, t);
    losses.push_back(loss);
    const auto grads = model.backward(grad);
    const double lr = learning_rate(static_cast<double>(t), config.iterations, config.lr);
    for (std::size_t i = 0; i < grads.size(); ++i) {
      auto& layer = model.layers()[i];
      sgd_step(layer.weight, grads[i].dW, velocity[i].dW, lr, config.momentum);
      sgd_step(layer.bias, grads[i].db, velocity[i].db, lr, config.momentum);
    }
  }
  return losses;
}

std::vector<std::size_t> default_teacher_dims(const TaskSpec& spec) {
  return {spec.dim, 64, 64, spec.classes};
}

DenseModel pretrain_teacher(const SyntheticTask& task, const PretrainConfig& config, Rng& rng) {
  Rng init_rng = rng.fork(0xD1);
  DenseModel model(default_teacher_dims(task.spec()), init_rng);
  if (config.epochs == 0) return model;
  const Dataset data = task.sample(Domain::Source, Split::Train, config.train_samples);
  DenseTrainConfig dense;
  dense.batch_size = config.batch_size;
  dense.iterations = config.epochs * std::max<std::size_t>(1, data.size() / config.batch_size);
  dense.lr = config.lr;
  dense.momentum = config.momentum;
  Rng train_rng = rng.fork(0xD2);
  train_dense(model, data, dense, train_rng);
  return model;
}

std::vector<CalibrationStats> collect_calibration(const DenseModel& teacher, const Dataset& data,
                                                  std::size_t n_samples) {
  if (n_samples == 0) throw std::invalid_argument("collect_calibration: n_samples must be positive");
  if (n_samples > data.size()) {
    throw std::invalid_argument("collect_calibration: requested " + std::to_string(n_samples) +
                                " samples, only " + std::to_string(data.size()) + " available");
  }
  std::vector<CalibrationStats> stats;
  for (const auto& layer : teacher.layers()) stats.emplace_back(layer.weight.cols());
  constexpr std::size_t kChunk = 128;
  for (std::size_t begin = 0; begin < n_samples; begin += kChunk) {
    const std::size_t count = std::min(kChunk, n_samples - begin);
    const auto inputs = teacher.layer_inputs(column_block(data.inputs, begin, count));
    for (std::size_t i = 0; i < stats.size(); ++i) stats[i].accumulate(inputs[i]);
  }
  return stats;
}

std::vector<TraceEntry> train_progressive(ToyModel& model, const Dataset& data,
                                          const ProgressiveConfig& config, Rng& rng) {
  config.lr.validate();
  std::vector<TraceEntry> trace;
  if (config.total_iters == 0) return trace;
  const DecaySchedule decay = config.decay();
  RegularizationMode reg = config.regularization;
  if (reg.kind == RegularizationMode::Kind::Dynamic) reg.schedule = decay;

  BatchSampler sampler(data, config.batch_size, rng.fork(2));
  const std::size_t n_layers = model.layers().size();
  std::vector<LayerGrads> velocity(n_layers);
  trace.reserve(config.total_iters);

  for (std::size_t t = 0; t < config.total_iters; ++t) {
    const double step = static_cast<double>(t);
    const double a = config.progressive ? alpha(step, decay) : 0.0;
    const double ap = config.progressive ? student_weight(step, decay, config.blend) : 1.0;
    const double g = gamma(step, reg);
    const double lr = learning_rate(step, config.total_iters, config.lr);

    const Dataset batch = sampler.next();
    const Matrix logits = model.forward(batch.inputs, a, ap);
    OutputGradients grads;
    const LossBreakdown loss = compute_loss(model, logits, batch.labels, g, config.task_weight, &grads);
    check_loss(loss.total, t);
    trace.push_back({t, a, ap, g, lr, loss.task_loss, loss.feat_loss, loss.total});

    const auto layer_grads = model.backward(grads, a, ap);
    for (std::size_t i = 0; i < n_layers; ++i) {
      auto& layer = model.layers()[i];
      sgd_step(layer.B(), layer_grads[i].dB, velocity[i].dB, lr, config.momentum);
      sgd_step(layer.A(), layer_grads[i].dA, velocity[i].dA, lr, config.momentum);
      sgd_step(layer.bias(), layer_grads[i].db, velocity[i].db, lr, config.momentum);
    }
  }
  return trace;
}

double accuracy(const Matrix& logits, std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy: empty split");
  if (logits.cols() != labels.size()) throw DimensionError("accuracy: label count mismatch");
  std::size_t correct = 0;
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.rows(); ++c)
      if (logits(c, j) > logits(best, j)) best = c;
    if (static_cast<int>(best) == labels[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate(const DenseModel& model, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty split");
  return accuracy(model.predict(data.inputs), data.labels);
}

double evaluate(const ToyModel& model, const Dataset& data, double alpha, double alpha_prime) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty split");
  return accuracy(model.predict(data.inputs, alpha, alpha_prime), data.labels);
}

double compression_ratio(const ToyModel& model) {
  std::size_t kept = 0;
  std::size_t dense = 0;
  for (const auto& layer : model.layers()) {
    kept += layer.student_parameter_count();
    dense += layer.dense_parameter_count();
  }
  return static_cast<double>(kept) / static_cast<double>(dense);
}

}  // namespace tunecomp
