// SPDX-License-Identifier: Apache-2.0
// tunecomp command-line driver.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tunecomp/commands.hpp"
#include "tunecomp/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeFailure = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tunecomp: joint fine-tuning and compression into pruned low-rank students"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  const char* names[] = {"pretrain", "calibrate", "run", "init-bench", "sweep", "pareto", "report"};
  const char* help[] = {
      "train the source-domain teacher",
      "collect per-layer calibration statistics on the target domain",
      "run one pipeline and append a results row",
      "compare every initialization method",
      "sweep ranks x prune ratios x seeds",
      "nondominated (compression ratio, accuracy) front of the results",
      "per-series mean and stddev of accuracy by compression ratio",
  };
  for (std::size_t i = 0; i < std::size(names); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out, "output directory (overrides config)");
    sub->add_option("--seed", seed, "run seed (overrides config)");
    sub->add_option("--jobs", jobs, "worker threads for sweep")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidationError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  tunecomp::RunConfig config;
  try {
    config = tunecomp::load_config(config_path);
    if (!out.empty()) config.out = out;
    if (seed) config.seed = *seed;
    tunecomp::validate(config);
  } catch (const std::exception& e) {
    std::cerr << "tunecomp " << command << ": " << e.what() << "\n";
    return kValidationError;
  }

  try {
    if (command == "pretrain") {
      tunecomp::cmd_pretrain(config, std::cout);
    } else if (command == "calibrate") {
      tunecomp::cmd_calibrate(config, std::cout);
    } else if (command == "run") {
      tunecomp::cmd_run(config, std::cout);
    } else if (command == "init-bench") {
      tunecomp::cmd_init_bench(config, std::cout);
    } else if (command == "sweep") {
      tunecomp::cmd_sweep(config, jobs, std::cout);
    } else if (command == "pareto") {
      tunecomp::cmd_pareto(config, std::cout);
    } else {
      tunecomp::cmd_report(config, std::cout);
    }
  } catch (const tunecomp::ConfigError& e) {
    std::cerr << "tunecomp " << command << ": " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "tunecomp " << command << ": " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}
