// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tunecomp/lowrank.hpp"
#include "tunecomp/model.hpp"
#include "tunecomp/pruning.hpp"
#include "tunecomp/rng.hpp"
#include "tunecomp/schedules.hpp"
#include "tunecomp/task.hpp"

namespace tunecomp {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean softmax cross-entropy over columns of `logits`. If `grad` is non-null
/// it receives dL/dlogits.
double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad = nullptr);

/// Mean of squared differences over all entries.
double mse(const Matrix& a, const Matrix& b);

struct LossBreakdown {
  double task_loss = 0.0;
  double feat_loss = 0.0;  // (1/m)·Σ MSE(F_t, F_s) over the m layers
  double gamma = 0.0;
  double task_weight = 1.0;
  double total = 0.0;  // task_weight·task_loss + gamma·feat_loss
};

/// Combined loss over the branch features cached by the last forward pass
/// of `model`. `logits` is that forward's output.
///
/// With `detach_teacher` the teacher features act as fixed distillation
/// targets: no gradient flows back through them into earlier layers.
LossBreakdown compute_loss(const ToyModel& model, const Matrix& logits,
                           std::span<const int> labels, double gamma, double task_weight = 1.0,
                           OutputGradients* grads = nullptr, bool detach_teacher = true);

/// velocity = momentum·velocity + grad; param −= lr·velocity.
/// Throws NonFiniteError if `grad` has a NaN or infinity.
void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum);
void sgd_step(Vector& param, const Vector& grad, Vector& velocity, double lr, double momentum);

/// Shuffled mini-batches, reshuffled every epoch.
class BatchSampler {
 public:
  BatchSampler(const Dataset& data, std::size_t batch_size, Rng rng);
  Dataset next();

 private:
  const Dataset* data_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct DenseTrainConfig {
  std::size_t iterations = 1500;
  std::size_t batch_size = 32;
  LrSchedule lr{1e-3, 5e-2, 0.3};
  double momentum = 0.9;
};

/// Cross-entropy fine-tuning of every weight and bias; returns the loss per step.
std::vector<double> train_dense(DenseModel& model, const Dataset& data,
                                const DenseTrainConfig& config, Rng& rng);

/// Default teacher shape: dim → 64 → 64 → classes.
std::vector<std::size_t> default_teacher_dims(const TaskSpec& spec);

struct PretrainConfig {
  std::size_t epochs = 12;
  std::size_t train_samples = 4096;
  std::size_t batch_size = 32;
  LrSchedule lr{1e-3, 5e-2, 0.3};
  double momentum = 0.9;
};

/// Trains a dense teacher on the source domain. Zero epochs leaves the random init.
DenseModel pretrain_teacher(const SyntheticTask& task, const PretrainConfig& config, Rng& rng);

/// Input statistics of every teacher layer over `data`, accumulated in chunks.
std::vector<CalibrationStats> collect_calibration(const DenseModel& teacher, const Dataset& data,
                                                  std::size_t n_samples);

/// Configuration of one progressive (teacher → student) training phase.
struct ProgressiveConfig {
  std::size_t total_iters = 2000;
  double decay_fraction = 0.8;
  std::size_t batch_size = 32;
  LrSchedule lr{1e-3, 5e-2, 0.3};
  double momentum = 0.9;
  BlendMode blend = BlendMode::PowerConserving;
  /// Weight on the feature loss. Dynamic modes are re-anchored to this
  /// phase's decay schedule.
  RegularizationMode regularization = RegularizationMode::dynamic({});
  /// 0 drops the task loss (pure distillation).
  double task_weight = 1.0;
  /// false: teacher branch off throughout (α = 0, α′ = 1).
  bool progressive = true;

  DecaySchedule decay() const { return DecaySchedule::from_fraction(total_iters, decay_fraction); }
};

struct TraceEntry {
  std::size_t step = 0;
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double gamma = 0.0;
  double lr = 0.0;
  double task_loss = 0.0;
  double feat_loss = 0.0;
  double total = 0.0;
};

/// Runs total_iters momentum-SGD steps on the student parameters.
std::vector<TraceEntry> train_progressive(ToyModel& model, const Dataset& data,
                                          const ProgressiveConfig& config, Rng& rng);

/// Fraction of samples whose argmax logit equals the label.
double accuracy(const Matrix& logits, std::span<const int> labels);
double evaluate(const DenseModel& model, const Dataset& data);
/// Evaluates the dual-branch network with the given blend weights.
double evaluate(const ToyModel& model, const Dataset& data, double alpha = 0.0,
                double alpha_prime = 1.0);

/// Σ student parameters / Σ (d_out·d_in + d_out), counted after pruning.
double compression_ratio(const ToyModel& model);

}  // namespace tunecomp
