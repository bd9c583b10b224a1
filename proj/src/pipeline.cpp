// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/pipeline.hpp"

#include <chrono>
#include <stdexcept>

namespace tunecomp {

namespace {

struct NamedPipeline {
  PipelineKind kind;
  const char* name;
};

constexpr NamedPipeline kPipelines[] = {
    {PipelineKind::FineTuneOnly, "fine-tune"},
    {PipelineKind::FtThenDistill, "ft-distill"},
    {PipelineKind::DistillThenFt, "distill-ft"},
    {PipelineKind::Joint, "joint"},
    {PipelineKind::DistillOnly, "distill-only"},
};

ProgressiveConfig base_phase(const ExperimentConfig& config, std::size_t iters) {
  ProgressiveConfig p;
  p.total_iters = iters;
  p.decay_fraction = config.decay_fraction;
  p.batch_size = config.batch_size;
  p.lr = config.lr;
  p.momentum = config.momentum;
  p.blend = config.blend;
  return p;
}

// Label-free distillation: the feature loss is the whole objective.
ProgressiveConfig distill_phase(const ExperimentConfig& config, std::size_t iters) {
  ProgressiveConfig p = base_phase(config, iters);
  p.task_weight = 0.0;
  p.regularization = RegularizationMode::constant_weight(1.0);
  return p;
}

// Plain task fine-tuning of a student whose teacher branch is already gone.
ProgressiveConfig student_finetune_phase(const ExperimentConfig& config, std::size_t iters) {
  ProgressiveConfig p = base_phase(config, iters);
  p.progressive = false;
  p.regularization = RegularizationMode::constant_weight(0.0);
  return p;
}

DenseTrainConfig dense_phase(const ExperimentConfig& config, std::size_t iters) {
  DenseTrainConfig d;
  d.iterations = iters;
  d.batch_size = config.batch_size;
  d.lr = config.lr;
  d.momentum = config.momentum;
  return d;
}

ToyModel build_student(const ExperimentConfig& config, const DenseModel& teacher,
                       const Dataset& calibration_data,
                       const std::vector<CalibrationStats>* precomputed, Rng& rng) {
  std::vector<CalibrationStats> stats;
  if (config.init.needs_calibration()) {
    if (precomputed != nullptr) {
      stats = *precomputed;
    } else {
      stats = collect_calibration(teacher, calibration_data, config.calibration_samples);
    }
  }
  Rng init_rng = rng.fork(0x11);
  return ToyModel::from_teacher(teacher, config.init, config.rank, PruneSpec(config.prune_ratio),
                                stats.empty() ? nullptr : &stats, init_rng);
}

void append(std::vector<TraceEntry>& into, const std::vector<TraceEntry>& phase,
            std::size_t offset) {
  for (TraceEntry e : phase) {
    e.step += offset;
    into.push_back(e);
  }
}

}  // namespace

std::string to_string(PipelineKind kind) {
  for (const auto& p : kPipelines)
    if (p.kind == kind) return p.name;
  return "?";
}

PipelineKind parse_pipeline(std::string_view name) {
  for (const auto& p : kPipelines)
    if (name == p.name) return p.kind;
  throw std::invalid_argument("unknown pipeline '" + std::string(name) + "'");
}

std::vector<PipelineKind> all_pipelines() {
  std::vector<PipelineKind> out;
  for (const auto& p : kPipelines) out.push_back(p.kind);
  return out;
}

ProgressiveConfig joint_phase(const ExperimentConfig& config, std::size_t iters) {
  ProgressiveConfig p = base_phase(config, iters);
  p.regularization = config.regularization == RegularizationMode::Kind::Constant
                         ? RegularizationMode::constant_weight(config.constant_gamma)
                         : RegularizationMode::dynamic({});
  return p;
}

PipelineResult run_pipeline(const ExperimentConfig& config, const DenseModel& teacher,
                            const SyntheticTask& task,
                            const std::vector<CalibrationStats>* calibration) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(config.seed).fork(0xB0);
  const Dataset train = task.sample(Domain::Target, Split::Train, config.train_samples);
  const Dataset test = task.sample(Domain::Target, Split::Test, config.test_samples);
  const Dataset calib = task.sample(Domain::Target, Split::Calibration, config.calibration_samples);

  PipelineResult result;
  RunRecord& rec = result.record;
  rec.pipeline = to_string(config.pipeline);
  rec.init = to_string(config.init);
  rec.rank = config.rank;
  rec.prune_ratio = config.prune_ratio;
  rec.seed = config.seed;

  const std::size_t total = config.total_iters;
  const std::size_t first_half = total / 2;
  Rng phase1 = rng.fork(1);
  Rng phase2 = rng.fork(2);

  switch (config.pipeline) {
    case PipelineKind::FineTuneOnly: {
      DenseModel model = teacher;
      train_dense(model, train, dense_phase(config, total), phase1);
      rec.init = "none";
      rec.rank = 0;
      rec.prune_ratio = 0.0;
      rec.compression_ratio = 1.0;
      rec.accuracy = evaluate(model, test);
      break;
    }
    case PipelineKind::FtThenDistill: {
      DenseModel tuned = teacher;
      train_dense(tuned, train, dense_phase(config, first_half), phase1);
      ToyModel student = build_student(config, tuned, calib, nullptr, rng);
      append(result.trace, train_progressive(student, train, distill_phase(config, total - first_half), phase2),
             first_half);
      result.student = std::move(student);
      break;
    }
    case PipelineKind::DistillThenFt: {
      ToyModel student = build_student(config, teacher, calib, calibration, rng);
      append(result.trace, train_progressive(student, train, distill_phase(config, first_half), phase1), 0);
      append(result.trace,
             train_progressive(student, train, student_finetune_phase(config, total - first_half), phase2),
             first_half);
      result.student = std::move(student);
      break;
    }
    case PipelineKind::Joint: {
      ToyModel student = build_student(config, teacher, calib, calibration, rng);
      result.trace = train_progressive(student, train, joint_phase(config, total), phase1);
      result.student = std::move(student);
      break;
    }
    case PipelineKind::DistillOnly: {
      ToyModel student = build_student(config, teacher, calib, calibration, rng);
      result.trace = train_progressive(student, train, distill_phase(config, total), phase1);
      result.student = std::move(student);
      break;
    }
  }

  if (result.student) {
    rec.compression_ratio = compression_ratio(*result.student);
    rec.accuracy = evaluate(*result.student, test, 0.0, 1.0);
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tunecomp
