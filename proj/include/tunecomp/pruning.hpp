// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "tunecomp/matrix.hpp"

namespace tunecomp {

/// Fraction of entries to zero in each pruned matrix.
class PruneSpec {
 public:
  PruneSpec() = default;
  /// Throws std::invalid_argument unless 0 <= ratio <= 1.
  explicit PruneSpec(double ratio);

  double ratio() const { return ratio_; }
  /// floor(ratio·numel)
  std::size_t pruned_count(std::size_t numel) const;
  std::size_t kept_count(std::size_t numel) const { return numel - pruned_count(numel); }

 private:
  double ratio_ = 0.0;
};

/// Survivor mask congruent to the matrix it was computed from.
struct PruneMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;
  std::size_t kept = 0;

  static PruneMask full(std::size_t rows, std::size_t cols);
  bool kept_at(std::size_t flat) const { return keep[flat] != 0; }
};

/// Zeroes exactly floor(ρ·numel) smallest-magnitude entries. Ties go to the
/// smaller row-major index first, so the survivor sets are nested in ρ.
std::pair<Matrix, PruneMask> hard_shrink(const Matrix& m, const PruneSpec& spec);

/// Zeroes gradient entries at pruned positions; survivors pass through.
Matrix mask_gradient(const Matrix& grad, const PruneMask& mask);

}  // namespace tunecomp
