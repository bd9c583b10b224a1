// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tunecomp/matrix.hpp"

namespace tunecomp {

/// Samples as columns, one label per column.
struct Dataset {
  Matrix inputs;  // dim x n
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  /// Columns listed in `indices`, in that order.
  Dataset gather(const std::vector<std::size_t>& indices) const;
  /// First n samples.
  Dataset head(std::size_t n) const;
};

enum class Domain { Source, Target };
enum class Split { Train, Test, Calibration };

struct TaskSpec {
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t modes_per_class = 2;
  double cluster_spread = 1.6;  // stddev of cluster centres
  double noise = 1.0;           // stddev scale of within-cluster noise
  double shift = 1.5;           // target mean translation, in units of `noise`
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a degenerate specification.
  void validate() const;
};

/// Gaussian-mixture classification task with a source and a shifted target domain.
///
/// Every class owns `modes_per_class` cluster centres and one anisotropic
/// noise shape. The target domain translates every sample by `shift·noise`
/// along a fixed random direction and relabels class c as (c + 1) mod C.
class SyntheticTask {
 public:
  explicit SyntheticTask(TaskSpec spec);

  const TaskSpec& spec() const { return spec_; }
  int target_label(int source_label) const;

  /// Deterministic in (seed, domain, split, n); a larger n extends a smaller draw.
  Dataset sample(Domain domain, Split split, std::size_t n) const;

 private:
  TaskSpec spec_;
  std::vector<Matrix> centres_;  // per class: dim x modes
  std::vector<Matrix> shapes_;   // per class: dim x dim noise factor
  Vector shift_;
};

}  // namespace tunecomp
