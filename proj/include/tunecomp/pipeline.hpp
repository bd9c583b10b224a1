// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunecomp/lowrank.hpp"
#include "tunecomp/model.hpp"
#include "tunecomp/task.hpp"
#include "tunecomp/training.hpp"

namespace tunecomp {

/// The compression pipelines under comparison.
enum class PipelineKind {
  FineTuneOnly,   // dense fine-tune, no compression
  FtThenDistill,  // dense fine-tune, then distill into the pruned low-rank student
  DistillThenFt,  // distill into the student, then fine-tune the student alone
  Joint,          // progressive distill + prune + fine-tune in one run
  DistillOnly,    // distill into the student without ever seeing target labels
};

std::string to_string(PipelineKind kind);
/// Accepts "fine-tune", "ft-distill", "distill-ft", "joint", "distill-only".
PipelineKind parse_pipeline(std::string_view name);
std::vector<PipelineKind> all_pipelines();

/// Everything one pipeline run needs besides the teacher and the task.
struct ExperimentConfig {
  PipelineKind pipeline = PipelineKind::Joint;
  InitMethod init{};
  std::size_t rank = 8;
  double prune_ratio = 0.2;
  RegularizationMode::Kind regularization = RegularizationMode::Kind::Dynamic;
  double constant_gamma = 0.2;
  BlendMode blend = BlendMode::PowerConserving;
  std::size_t total_iters = 2000;
  double decay_fraction = 0.8;
  std::size_t batch_size = 32;
  LrSchedule lr{1e-3, 5e-2, 0.3};
  double momentum = 0.9;
  std::size_t train_samples = 2048;
  std::size_t test_samples = 4000;
  std::size_t calibration_samples = 512;
  std::uint64_t seed = 0;
};

struct RunRecord {
  std::string pipeline;
  std::string init;
  std::size_t rank = 0;
  double prune_ratio = 0.0;
  std::uint64_t seed = 0;
  double compression_ratio = 1.0;
  double accuracy = 0.0;
  double wall_time = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct PipelineResult {
  RunRecord record;
  /// Per-step trace of every progressive phase, in execution order.
  std::vector<TraceEntry> trace;
  /// Final student; empty for FineTuneOnly.
  std::optional<ToyModel> student;
};

/// Runs one pipeline on the target domain of `task`, starting from `teacher`.
/// All phases together consume exactly `config.total_iters` optimizer steps.
/// `calibration`, if given, replaces statistics collected from the teacher;
/// FtThenDistill always recollects on its fine-tuned teacher.
PipelineResult run_pipeline(const ExperimentConfig& config, const DenseModel& teacher,
                            const SyntheticTask& task,
                            const std::vector<CalibrationStats>* calibration = nullptr);

/// The phase settings a pipeline uses for joint training.
ProgressiveConfig joint_phase(const ExperimentConfig& config, std::size_t iters);

}  // namespace tunecomp
