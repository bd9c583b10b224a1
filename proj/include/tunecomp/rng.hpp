// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "tunecomp/matrix.hpp"

namespace tunecomp {

/// Seeded generator with a platform-independent output sequence.
///
/// Bits come from std::mt19937_64, whose output is fully specified by the
/// standard. Uniforms take the top 53 bits; normals use the Box-Muller
/// transform (both values of each pair are consumed in order). Library
/// distributions are avoided because their algorithms are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Independent child generator for a named stream.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// i.i.d. N(0, stddev²) entries, filled row-major.
Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng);

}  // namespace tunecomp
