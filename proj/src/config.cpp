// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/config.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

namespace tunecomp {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ConfigError(join(prefix, key), "unknown field");
  }
}

double get_double(const json& obj, const std::string& prefix, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(prefix, key), "must be finite");
  return d;
}

std::uint64_t get_uint(const json& obj, const std::string& prefix, const std::string& key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(join(prefix, key), "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& prefix, const std::string& key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "expected a string");
  return v.get<std::string>();
}

const json& get_array(const json& obj, const std::string& prefix, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(join(prefix, key), "expected a nonempty array");
  return v;
}

template <typename F>
auto named(const std::string& field, F&& parse) {
  try {
    return parse();
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
    throw ConfigError(field, e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void validate_lr(const LrSchedule& lr, const std::string& prefix) {
  require(lr.lr_min > 0.0, join(prefix, "lr_min"), "must be > 0");
  require(lr.lr_max >= lr.lr_min, join(prefix, "lr_max"), "must be >= lr_min");
  require(lr.warmup_fraction > 0.0 && lr.warmup_fraction < 1.0, join(prefix, "warmup_fraction"),
          "must be in (0, 1)");
}

void validate_experiment(const ExperimentConfig& e) {
  require(e.rank >= 1, "rank", "must be >= 1");
  require(e.prune_ratio >= 0.0 && e.prune_ratio <= 1.0, "prune_ratio", "must be in [0, 1]");
  require(e.constant_gamma >= 0.0, "constant_gamma", "must be >= 0");
  require(e.total_iters >= 1, "schedule.total_iters", "must be >= 1");
  require(e.decay_fraction > 0.0 && e.decay_fraction <= 1.0, "schedule.decay_fraction", "must be in (0, 1]");
  require(e.batch_size >= 1, "schedule.batch_size", "must be >= 1");
  require(e.momentum >= 0.0 && e.momentum < 1.0, "schedule.momentum", "must be in [0, 1)");
  validate_lr(e.lr, "schedule");
  require(e.train_samples >= 1, "data.train_samples", "must be >= 1");
  require(e.test_samples >= 1, "data.test_samples", "must be >= 1");
  require(e.calibration_samples >= 1, "data.calibration_samples", "must be >= 1");
}

}  // namespace

std::vector<double> default_prune_grid() { return {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95}; }

ExperimentConfig RunConfig::experiment_for(std::uint64_t run_seed) const {
  ExperimentConfig e = experiment;
  e.seed = run_seed;
  return e;
}

void validate(const RunConfig& c) {
  require(!c.out.empty(), "out", "must be a nonempty path");
  named("task", [&] {
    c.task.validate();
    return 0;
  });
  require(c.pretrain.train_samples >= 1, "pretrain.train_samples", "must be >= 1");
  require(c.pretrain.batch_size >= 1, "pretrain.batch_size", "must be >= 1");
  require(c.pretrain.momentum >= 0.0 && c.pretrain.momentum < 1.0, "pretrain.momentum", "must be in [0, 1)");
  validate_lr(c.pretrain.lr, "pretrain");
  validate_experiment(c.experiment);
  for (std::size_t r : c.sweep.ranks) require(r >= 1, "sweep.ranks", "every rank must be >= 1");
  for (double p : c.sweep.prune_ratios) {
    require(p >= 0.0 && p <= 1.0, "sweep.prune_ratios", "every ratio must be in [0, 1]");
  }
  require(!c.sweep.ranks.empty(), "sweep.ranks", "must be nonempty");
  require(!c.sweep.prune_ratios.empty(), "sweep.prune_ratios", "must be nonempty");
  require(!c.sweep.seeds.empty(), "sweep.seeds", "must be nonempty");
  require(!c.sweep.pipelines.empty(), "sweep.pipelines", "must be nonempty");
  require(!c.sweep.inits.empty(), "sweep.inits", "must be nonempty");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"out", "seed", "task", "pretrain", "teacher", "calibration", "results", "pipeline", "init",
                  "rank", "prune_ratio", "regularization", "constant_gamma", "blend", "schedule", "data",
                  "sweep"});
  RunConfig c;
  c.out = get_string(root, "", "out", c.out.string());
  c.seed = get_uint(root, "", "seed", c.seed);
  if (root.contains("teacher")) c.teacher = get_string(root, "", "teacher", "");
  if (root.contains("calibration")) c.calibration = get_string(root, "", "calibration", "");
  if (root.contains("results")) c.results = get_string(root, "", "results", "");

  if (root.contains("task")) {
    const json& t = root.at("task");
    reject_unknown(t, "task", {"classes", "dim", "modes_per_class", "cluster_spread", "noise", "shift", "seed"});
    c.task.classes = get_uint(t, "task", "classes", c.task.classes);
    c.task.dim = get_uint(t, "task", "dim", c.task.dim);
    c.task.modes_per_class = get_uint(t, "task", "modes_per_class", c.task.modes_per_class);
    c.task.cluster_spread = get_double(t, "task", "cluster_spread", c.task.cluster_spread);
    c.task.noise = get_double(t, "task", "noise", c.task.noise);
    c.task.shift = get_double(t, "task", "shift", c.task.shift);
    c.task.seed = get_uint(t, "task", "seed", c.task.seed);
  }

  if (root.contains("pretrain")) {
    const json& p = root.at("pretrain");
    reject_unknown(p, "pretrain",
                   {"epochs", "train_samples", "batch_size", "lr_min", "lr_max", "warmup_fraction", "momentum"});
    c.pretrain.epochs = get_uint(p, "pretrain", "epochs", c.pretrain.epochs);
    c.pretrain.train_samples = get_uint(p, "pretrain", "train_samples", c.pretrain.train_samples);
    c.pretrain.batch_size = get_uint(p, "pretrain", "batch_size", c.pretrain.batch_size);
    c.pretrain.lr.lr_min = get_double(p, "pretrain", "lr_min", c.pretrain.lr.lr_min);
    c.pretrain.lr.lr_max = get_double(p, "pretrain", "lr_max", c.pretrain.lr.lr_max);
    c.pretrain.lr.warmup_fraction = get_double(p, "pretrain", "warmup_fraction", c.pretrain.lr.warmup_fraction);
    c.pretrain.momentum = get_double(p, "pretrain", "momentum", c.pretrain.momentum);
  }

  ExperimentConfig& e = c.experiment;
  if (root.contains("pipeline")) {
    e.pipeline = named("pipeline", [&] { return parse_pipeline(get_string(root, "", "pipeline", "")); });
  }
  if (root.contains("init")) {
    e.init = named("init", [&] { return parse_init_method(get_string(root, "", "init", "")); });
  }
  e.rank = get_uint(root, "", "rank", e.rank);
  e.prune_ratio = get_double(root, "", "prune_ratio", e.prune_ratio);
  e.constant_gamma = get_double(root, "", "constant_gamma", e.constant_gamma);
  if (root.contains("regularization")) {
    const std::string r = get_string(root, "", "regularization", "");
    if (r == "dynamic") {
      e.regularization = RegularizationMode::Kind::Dynamic;
    } else if (r == "constant") {
      e.regularization = RegularizationMode::Kind::Constant;
    } else {
      throw ConfigError("regularization", "expected \"dynamic\" or \"constant\", got \"" + r + "\"");
    }
  }
  if (root.contains("blend")) {
    const std::string b = get_string(root, "", "blend", "");
    if (b == "power-conserving") {
      e.blend = BlendMode::PowerConserving;
    } else if (b == "unit") {
      e.blend = BlendMode::Unit;
    } else {
      throw ConfigError("blend", "expected \"power-conserving\" or \"unit\", got \"" + b + "\"");
    }
  }

  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    reject_unknown(s, "schedule",
                   {"total_iters", "decay_fraction", "lr_min", "lr_max", "warmup_fraction", "batch_size",
                    "momentum"});
    e.total_iters = get_uint(s, "schedule", "total_iters", e.total_iters);
    e.decay_fraction = get_double(s, "schedule", "decay_fraction", e.decay_fraction);
    e.lr.lr_min = get_double(s, "schedule", "lr_min", e.lr.lr_min);
    e.lr.lr_max = get_double(s, "schedule", "lr_max", e.lr.lr_max);
    e.lr.warmup_fraction = get_double(s, "schedule", "warmup_fraction", e.lr.warmup_fraction);
    e.batch_size = get_uint(s, "schedule", "batch_size", e.batch_size);
    e.momentum = get_double(s, "schedule", "momentum", e.momentum);
  }

  if (root.contains("data")) {
    const json& d = root.at("data");
    reject_unknown(d, "data", {"train_samples", "test_samples", "calibration_samples"});
    e.train_samples = get_uint(d, "data", "train_samples", e.train_samples);
    e.test_samples = get_uint(d, "data", "test_samples", e.test_samples);
    e.calibration_samples = get_uint(d, "data", "calibration_samples", e.calibration_samples);
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    reject_unknown(s, "sweep", {"ranks", "prune_ratios", "seeds", "pipelines", "inits"});
    if (s.contains("ranks")) {
      c.sweep.ranks.clear();
      for (const auto& v : get_array(s, "sweep", "ranks")) {
        if (!v.is_number_unsigned()) throw ConfigError("sweep.ranks", "expected nonnegative integers");
        c.sweep.ranks.push_back(v.get<std::size_t>());
      }
    }
    if (s.contains("prune_ratios")) {
      c.sweep.prune_ratios.clear();
      for (const auto& v : get_array(s, "sweep", "prune_ratios")) {
        if (!v.is_number()) throw ConfigError("sweep.prune_ratios", "expected numbers");
        c.sweep.prune_ratios.push_back(v.get<double>());
      }
    }
    if (s.contains("seeds")) {
      c.sweep.seeds.clear();
      for (const auto& v : get_array(s, "sweep", "seeds")) {
        if (!v.is_number_unsigned()) throw ConfigError("sweep.seeds", "expected nonnegative integers");
        c.sweep.seeds.push_back(v.get<std::uint64_t>());
      }
    }
    if (s.contains("pipelines")) {
      c.sweep.pipelines.clear();
      for (const auto& v : get_array(s, "sweep", "pipelines")) {
        if (!v.is_string()) throw ConfigError("sweep.pipelines", "expected strings");
        c.sweep.pipelines.push_back(named("sweep.pipelines", [&] { return parse_pipeline(v.get<std::string>()); }));
      }
    }
    if (s.contains("inits")) {
      c.sweep.inits.clear();
      for (const auto& v : get_array(s, "sweep", "inits")) {
        if (!v.is_string()) throw ConfigError("sweep.inits", "expected strings");
        c.sweep.inits.push_back(named("sweep.inits", [&] { return parse_init_method(v.get<std::string>()); }));
      }
    }
  }

  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read config file");
  return parse_config(std::string(std::istreambuf_iterator<char>(in), {}));
}

}  // namespace tunecomp
