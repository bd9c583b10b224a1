// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tunecomp {

PruneSpec::PruneSpec(double ratio) : ratio_(ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("prune ratio " + std::to_string(ratio) + " outside [0, 1]");
  }
}

std::size_t PruneSpec::pruned_count(std::size_t numel) const {
  const auto k = static_cast<std::size_t>(std::floor(ratio_ * static_cast<double>(numel)));
  return std::min(k, numel);
}

PruneMask PruneMask::full(std::size_t rows, std::size_t cols) {
  return {rows, cols, std::vector<std::uint8_t>(rows * cols, 1), rows * cols};
}

std::pair<Matrix, PruneMask> hard_shrink(const Matrix& m, const PruneSpec& spec) {
  if (m.empty()) throw DimensionError("hard_shrink: empty matrix");
  const std::size_t numel = m.size();
  const std::size_t k = spec.pruned_count(numel);
  PruneMask mask = PruneMask::full(m.rows(), m.cols());
  Matrix out = m;
  if (k == 0) return {std::move(out), std::move(mask)};

  const auto values = m.data();
  std::vector<std::size_t> order(numel);
  std::iota(order.begin(), order.end(), 0);
  const auto smaller = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    return ma < mb || (ma == mb && a < b);
  };
  if (k < numel) std::nth_element(order.begin(), order.begin() + static_cast<long>(k), order.end(), smaller);

  auto o = out.data();
  for (std::size_t i = 0; i < k; ++i) {
    mask.keep[order[i]] = 0;
    o[order[i]] = 0.0;
  }
  mask.kept = numel - k;
  return {std::move(out), std::move(mask)};
}

Matrix mask_gradient(const Matrix& grad, const PruneMask& mask) {
  if (grad.rows() != mask.rows || grad.cols() != mask.cols) {
    throw DimensionError("mask_gradient: gradient " + shape_string(grad) +
                         " does not match mask " + std::to_string(mask.rows) + "x" +
                         std::to_string(mask.cols));
  }
  Matrix out = grad;
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i)
    if (!mask.kept_at(i)) o[i] = 0.0;
  return out;
}

}  // namespace tunecomp
