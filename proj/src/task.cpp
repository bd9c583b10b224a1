// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/task.hpp"

#include <cmath>
#include <stdexcept>

#include "tunecomp/rng.hpp"

namespace tunecomp {

Dataset Dataset::gather(const std::vector<std::size_t>& indices) const {
  Dataset out{Matrix(inputs.rows(), indices.size()), std::vector<int>(indices.size())};
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const std::size_t src = indices[j];
    for (std::size_t i = 0; i < inputs.rows(); ++i) out.inputs(i, j) = inputs(i, src);
    out.labels[j] = labels[src];
  }
  return out;
}

Dataset Dataset::head(std::size_t n) const {
  if (n > size()) throw std::out_of_range("Dataset::head: not enough samples");
  return {column_block(inputs, 0, n), std::vector<int>(labels.begin(), labels.begin() + static_cast<long>(n))};
}

void TaskSpec::validate() const {
  if (classes < 2) throw std::invalid_argument("task.classes must be at least 2");
  if (dim == 0) throw std::invalid_argument("task.dim must be positive");
  if (modes_per_class == 0) throw std::invalid_argument("task.modes_per_class must be positive");
  if (!(cluster_spread > 0.0)) throw std::invalid_argument("task.cluster_spread must be positive");
  if (!(noise > 0.0)) throw std::invalid_argument("task.noise must be positive");
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw std::invalid_argument("task.shift must be >= 0");
}

SyntheticTask::SyntheticTask(TaskSpec spec) : spec_(spec) {
  spec_.validate();
  Rng rng = Rng(spec_.seed).fork(0x7A5C);
  const std::size_t d = spec_.dim;
  for (std::size_t c = 0; c < spec_.classes; ++c) {
    centres_.push_back(gaussian(d, spec_.modes_per_class, spec_.cluster_spread, rng));
    // I + G/sqrt(d) gives a well-conditioned but anisotropic covariance.
    Matrix shape = gaussian(d, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    for (std::size_t i = 0; i < d; ++i) shape(i, i) += 1.0;
    shapes_.push_back(scale(shape, spec_.noise));
  }
  Matrix direction = gaussian(d, 1, 1.0, rng);
  const double norm = frobenius_norm(direction);
  shift_.resize(d);
  for (std::size_t i = 0; i < d; ++i) shift_[i] = spec_.shift * spec_.noise * direction(i, 0) / norm;
}

int SyntheticTask::target_label(int source_label) const {
  return (source_label + 1) % static_cast<int>(spec_.classes);
}

Dataset SyntheticTask::sample(Domain domain, Split split, std::size_t n) const {
  const std::uint64_t stream =
      (domain == Domain::Source ? 0x100 : 0x200) + static_cast<std::uint64_t>(split);
  Rng rng = Rng(spec_.seed).fork(stream);
  const std::size_t d = spec_.dim;
  Dataset out{Matrix(d, n), std::vector<int>(n)};
  Vector z(d);
  for (std::size_t j = 0; j < n; ++j) {
    const auto cls = static_cast<std::size_t>(rng.below(spec_.classes));
    const auto mode = static_cast<std::size_t>(rng.below(spec_.modes_per_class));
    for (double& v : z) v = rng.normal();
    const Matrix& shape = shapes_[cls];
    for (std::size_t i = 0; i < d; ++i) {
      double v = centres_[cls](i, mode);
      for (std::size_t k = 0; k < d; ++k) v += shape(i, k) * z[k];
      if (domain == Domain::Target) v += shift_[i];
      out.inputs(i, j) = v;
    }
    const int label = static_cast<int>(cls);
    out.labels[j] = domain == Domain::Target ? target_label(label) : label;
  }
  return out;
}

}  // namespace tunecomp
