// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "tunecomp/config.hpp"
#include "tunecomp/results.hpp"

namespace tunecomp {

/// Trains the source-domain teacher and saves it to config.teacher_path().
void cmd_pretrain(const RunConfig& config, std::ostream& log);
/// Per-layer teacher input statistics on the target calibration split.
void cmd_calibrate(const RunConfig& config, std::ostream& log);
/// One pipeline run; appends one row to the results CSV and returns it.
RunRecord cmd_run(const RunConfig& config, std::ostream& log);

struct InitBenchRow {
  std::string init;
  double frobenius_error = 0.0;       // sqrt(Σ_layers ‖W − BA‖_F²)
  double activation_objective = 0.0;  // Σ_layers trace((BA − W)·cov·(BA − W)ᵀ)
  double accuracy = 0.0;              // after the configured pipeline
};

/// Every initialization method at the configured rank; writes <out>/init_bench.csv.
std::vector<InitBenchRow> cmd_init_bench(const RunConfig& config, std::ostream& log);

/// Cross product pipelines × inits × ranks × ρ × seeds, in that nesting order.
std::vector<ExperimentConfig> sweep_grid(const RunConfig& config);
/// Runs the grid on `jobs` worker threads; rows are appended in grid order.
std::vector<RunRecord> cmd_sweep(const RunConfig& config, std::size_t jobs, std::ostream& log);

/// Nondominated results; writes <out>/pareto.csv.
std::vector<RunRecord> cmd_pareto(const RunConfig& config, std::ostream& log);
/// Writes <out>/report.csv.
std::vector<ReportRow> cmd_report(const RunConfig& config, std::ostream& log);

}  // namespace tunecomp
