// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "tunecomp/tensor_io.hpp"

namespace tunecomp {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeldOutSamples = 2000;

DenseModel load_teacher(const RunConfig& config) {
  const fs::path p = config.teacher_path();
  if (!fs::exists(p / "manifest.json")) {
    throw std::runtime_error("teacher checkpoint not found: " + p.string() + " (run `tunecomp pretrain` first)");
  }
  return dense_model_from(load_checkpoint(p));
}

std::vector<CalibrationStats> load_calibration(const fs::path& p) {
  if (!fs::exists(p / "manifest.json")) {
    throw std::runtime_error("calibration checkpoint not found: " + p.string());
  }
  return calibration_from(load_checkpoint(p));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string text = std::string(kResultsHeader) + '\n';
  for (const auto& r : records) text += format_record(r) + '\n';
  return text;
}

}  // namespace

void cmd_pretrain(const RunConfig& config, std::ostream& log) {
  SyntheticTask task(config.task);
  Rng rng(config.seed);
  DenseModel teacher = pretrain_teacher(task, config.pretrain, rng);
  const double src = evaluate(teacher, task.sample(Domain::Source, Split::Test, kHeldOutSamples));
  const double tgt = evaluate(teacher, task.sample(Domain::Target, Split::Test, kHeldOutSamples));
  save_checkpoint(config.teacher_path(), to_checkpoint(teacher));
  log << "teacher saved to " << config.teacher_path().string() << "\n"
      << "source accuracy " << format_double(src) << ", target accuracy " << format_double(tgt) << "\n";
}

void cmd_calibrate(const RunConfig& config, std::ostream& log) {
  const DenseModel teacher = load_teacher(config);
  SyntheticTask task(config.task);
  const std::size_t n = config.experiment.calibration_samples;
  const auto stats = collect_calibration(teacher, task.sample(Domain::Target, Split::Calibration, n), n);
  save_checkpoint(config.calibration_path(), to_checkpoint(stats));
  log << "calibration statistics for " << stats.size() << " layers (" << n << " samples) saved to "
      << config.calibration_path().string() << "\n";
}

RunRecord cmd_run(const RunConfig& config, std::ostream& log) {
  const DenseModel teacher = load_teacher(config);
  std::vector<CalibrationStats> calib;
  if (config.calibration) calib = load_calibration(*config.calibration);
  SyntheticTask task(config.task);
  const PipelineResult result =
      run_pipeline(config.experiment_for(config.seed), teacher, task, calib.empty() ? nullptr : &calib);
  append_records(config.results_path(), {result.record});
  log << format_record(result.record) << "\n";
  return result.record;
}

std::vector<InitBenchRow> cmd_init_bench(const RunConfig& config, std::ostream& log) {
  const DenseModel teacher = load_teacher(config);
  SyntheticTask task(config.task);
  const ExperimentConfig base = config.experiment_for(config.seed);
  std::vector<CalibrationStats> stats;
  if (config.calibration) {
    stats = load_calibration(*config.calibration);
  } else {
    stats = collect_calibration(
        teacher, task.sample(Domain::Target, Split::Calibration, base.calibration_samples),
        base.calibration_samples);
  }
  if (stats.size() != teacher.layers().size()) {
    throw std::runtime_error("calibration statistics do not match the teacher's layer count");
  }

  std::vector<InitBenchRow> rows;
  const auto methods = all_init_methods();
  for (std::size_t m = 0; m < methods.size(); ++m) {
    InitBenchRow row;
    row.init = to_string(methods[m]);
    Rng rng = Rng(base.seed).fork(0x1B00 + m);
    double frob_sq = 0.0;
    for (std::size_t i = 0; i < teacher.layers().size(); ++i) {
      const Matrix& w = teacher.layers()[i].weight;
      const std::size_t r = std::min({base.rank, w.rows(), w.cols()});
      const LowRankFactor f = initialize_factor(methods[m], w, r, &stats[i], rng);
      const double e = approximation_error(w, f);
      frob_sq += e * e;
      row.activation_objective += activation_objective(w, f, stats[i]);
    }
    row.frobenius_error = std::sqrt(frob_sq);
    ExperimentConfig e = base;
    e.init = methods[m];
    row.accuracy = run_pipeline(e, teacher, task, &stats).record.accuracy;
    log << row.init << ": frobenius " << format_double(row.frobenius_error) << ", activation "
        << format_double(row.activation_objective) << ", accuracy " << format_double(row.accuracy) << "\n";
    rows.push_back(row);
  }

  std::string text = "init,frobenius_error,activation_objective,accuracy\n";
  for (const auto& r : rows) {
    text += r.init + ',' + format_double(r.frobenius_error) + ',' + format_double(r.activation_objective) + ',' +
            format_double(r.accuracy) + '\n';
  }
  write_text(config.out / "init_bench.csv", text);
  return rows;
}

std::vector<ExperimentConfig> sweep_grid(const RunConfig& config) {
  std::vector<ExperimentConfig> grid;
  for (PipelineKind p : config.sweep.pipelines)
    for (const InitMethod& init : config.sweep.inits)
      for (std::size_t rank : config.sweep.ranks)
        for (double rho : config.sweep.prune_ratios)
          for (std::uint64_t seed : config.sweep.seeds) {
            ExperimentConfig e = config.experiment_for(seed);
            e.pipeline = p;
            e.init = init;
            e.rank = rank;
            e.prune_ratio = rho;
            grid.push_back(e);
          }
  return grid;
}

std::vector<RunRecord> cmd_sweep(const RunConfig& config, std::size_t jobs, std::ostream& log) {
  if (jobs == 0) throw ConfigError("--jobs", "must be >= 1");
  const DenseModel teacher = load_teacher(config);
  std::vector<CalibrationStats> calib;
  if (config.calibration) calib = load_calibration(*config.calibration);
  const SyntheticTask task(config.task);
  const auto grid = sweep_grid(config);

  fs::create_directories(config.out);
  const fs::path staging = config.out / ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);
  auto staging_file = [&](std::size_t i) { return staging / ("run-" + std::to_string(i) + ".csv"); };

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::vector<std::exception_ptr> errors(grid.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        const RunRecord rec = run_pipeline(grid[i], teacher, task, calib.empty() ? nullptr : &calib).record;
        write_text(staging_file(i), format_record(rec) + '\n');
        std::lock_guard lock(log_mutex);
        log << "[" << (i + 1) << "/" << grid.size() << "] " << format_record(rec) << "\n";
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < std::min(jobs, grid.size()); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (auto& e : errors) {
    if (e) {
      fs::remove_all(staging);
      std::rethrow_exception(e);
    }
  }
  std::vector<RunRecord> records;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::ifstream in(staging_file(i));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("missing staging output " + staging_file(i).string());
    records.push_back(parse_record(line));
  }
  append_records(config.results_path(), records);
  fs::remove_all(staging);
  log << records.size() << " runs appended to " << config.results_path().string() << "\n";
  return records;
}

std::vector<RunRecord> cmd_pareto(const RunConfig& config, std::ostream& log) {
  const auto front = pareto_front(read_records(config.results_path()));
  write_text(config.out / "pareto.csv", records_csv(front));
  for (const auto& r : front) log << format_record(r) << "\n";
  return front;
}

std::vector<ReportRow> cmd_report(const RunConfig& config, std::ostream& log) {
  const auto rows = build_report(read_records(config.results_path()));
  const std::string text = format_report(rows);
  write_text(config.out / "report.csv", text);
  log << text;
  return rows;
}

}  // namespace tunecomp
