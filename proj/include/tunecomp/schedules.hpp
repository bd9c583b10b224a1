// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace tunecomp {

/// Teacher decay horizon: α reaches zero at step `decay_iters()`.
class DecaySchedule {
 public:
  DecaySchedule() = default;
  /// Throws std::invalid_argument unless 0 < decay_iters <= total_iters.
  DecaySchedule(std::size_t total_iters, std::size_t decay_iters);
  /// decay_iters = floor(fraction·total_iters), clamped to at least 1.
  static DecaySchedule from_fraction(std::size_t total_iters, double fraction = 0.8);

  std::size_t total_iters() const { return total_; }
  std::size_t decay_iters() const { return decay_; }

 private:
  std::size_t total_ = 1;
  std::size_t decay_ = 1;
};

/// α_t = 1 − sin(πt / 2T) for t <= T, else 0.
double alpha(double t, const DecaySchedule& sched);
/// sqrt(1 − α_t²), keeping α² + α′² = 1.
double alpha_prime(double t, const DecaySchedule& sched);

/// How the student branch is weighted against the teacher.
enum class BlendMode {
  PowerConserving,  // α′ = sqrt(1 − α²)
  Unit,             // α′ = 1
};

double student_weight(double t, const DecaySchedule& sched, BlendMode mode);

/// Weight on the layer-wise feature loss.
struct RegularizationMode {
  enum class Kind { Constant, Dynamic };

  Kind kind = Kind::Dynamic;
  double constant = 0.2;
  DecaySchedule schedule;

  static RegularizationMode constant_weight(double value = 0.2) {
    return {Kind::Constant, value, {}};
  }
  static RegularizationMode dynamic(DecaySchedule sched) { return {Kind::Dynamic, 0.0, sched}; }
};

/// Constant → fixed value; Dynamic → same sine decay as α, from 1 to 0.
double gamma(double t, const RegularizationMode& mode);

/// Simplified one-cycle: linear warmup lr_min → lr_max, then cosine back to lr_min.
struct LrSchedule {
  double lr_min = 1e-3;
  double lr_max = 5e-2;
  double warmup_fraction = 0.3;

  /// Throws std::invalid_argument on an invalid combination.
  void validate() const;
};

double learning_rate(double t, std::size_t total, const LrSchedule& sched);

}  // namespace tunecomp
