// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/rng.hpp"

#include <cmath>
#include <numbers>

namespace tunecomp {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

Rng Rng::fork(std::uint64_t stream) const {
  return Rng(mix_seed(seed_ ^ mix_seed(stream + 0x632BE59BD9B4E019ULL)));
}

Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  if (!(stddev > 0.0)) throw std::invalid_argument("gaussian: stddev must be positive");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = stddev * rng.normal();
  return m;
}

}  // namespace tunecomp
