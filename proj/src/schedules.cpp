// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tunecomp {

DecaySchedule::DecaySchedule(std::size_t total_iters, std::size_t decay_iters)
    : total_(total_iters), decay_(decay_iters) {
  if (decay_iters == 0 || decay_iters > total_iters) {
    throw std::invalid_argument("DecaySchedule: need 0 < T <= total_iters (T=" +
                                std::to_string(decay_iters) +
                                ", total=" + std::to_string(total_iters) + ")");
  }
}

DecaySchedule DecaySchedule::from_fraction(std::size_t total_iters, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("DecaySchedule: decay fraction must be in (0, 1]");
  }
  const auto t = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total_iters)));
  const std::size_t total = std::max<std::size_t>(total_iters, 1);
  return DecaySchedule(total, std::clamp<std::size_t>(t, 1, total));
}

double alpha(double t, const DecaySchedule& sched) {
  const double horizon = static_cast<double>(sched.decay_iters());
  if (t >= horizon) return 0.0;
  if (t <= 0.0) return 1.0;
  return 1.0 - std::sin(std::numbers::pi * t / (2.0 * horizon));
}

double alpha_prime(double t, const DecaySchedule& sched) {
  const double a = alpha(t, sched);
  return std::sqrt(std::max(0.0, 1.0 - a * a));
}

double student_weight(double t, const DecaySchedule& sched, BlendMode mode) {
  return mode == BlendMode::Unit ? 1.0 : alpha_prime(t, sched);
}

double gamma(double t, const RegularizationMode& mode) {
  if (mode.kind == RegularizationMode::Kind::Constant) return mode.constant;
  return alpha(t, mode.schedule);
}

void LrSchedule::validate() const {
  if (!(lr_min > 0.0 && lr_min <= lr_max)) {
    throw std::invalid_argument("LrSchedule: need 0 < lr_min <= lr_max");
  }
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw std::invalid_argument("LrSchedule: warmup_fraction must be in (0, 1)");
  }
}

double learning_rate(double t, std::size_t total, const LrSchedule& sched) {
  const double n = static_cast<double>(std::max<std::size_t>(total, 1));
  const double warmup = sched.warmup_fraction * n;
  const double span = sched.lr_max - sched.lr_min;
  if (t <= 0.0) return sched.lr_min;
  if (t < warmup) return sched.lr_min + span * (t / warmup);
  const double progress = std::min(1.0, (t - warmup) / (n - warmup));
  return sched.lr_min + span * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace tunecomp
