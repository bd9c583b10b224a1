// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunecomp/pipeline.hpp"
#include "tunecomp/task.hpp"
#include "tunecomp/training.hpp"

namespace tunecomp {

/// A rejected configuration value. `field` is the dotted JSON path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// The ρ grid swept by default.
std::vector<double> default_prune_grid();

struct SweepSpec {
  std::vector<std::size_t> ranks{2, 4, 8, 16};
  std::vector<double> prune_ratios = default_prune_grid();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<PipelineKind> pipelines{PipelineKind::Joint};
  std::vector<InitMethod> inits{InitMethod{}};
};

struct RunConfig {
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  TaskSpec task;
  PretrainConfig pretrain;
  /// Defaults to <out>/teacher.
  std::optional<std::filesystem::path> teacher;
  /// Saved calibration statistics; collected in-process when absent.
  std::optional<std::filesystem::path> calibration;
  /// Defaults to <out>/results.csv.
  std::optional<std::filesystem::path> results;
  ExperimentConfig experiment;
  SweepSpec sweep;

  std::filesystem::path teacher_path() const { return teacher.value_or(out / "teacher"); }
  std::filesystem::path calibration_path() const { return calibration.value_or(out / "calibration"); }
  std::filesystem::path results_path() const { return results.value_or(out / "results.csv"); }
  /// `experiment` with the top-level seed applied.
  ExperimentConfig experiment_for(std::uint64_t run_seed) const;
};

/// Parses and validates JSON text. Unknown keys are errors.
RunConfig parse_config(const std::string& json_text);
/// Throws ConfigError (field "<file>") when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);
/// Re-checks every field; parse_config already calls this.
void validate(const RunConfig& config);

}  // namespace tunecomp
