// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "tunecomp/matrix.hpp"
#include "tunecomp/rng.hpp"

namespace tunecomp::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double stddev = 1.0) {
  Rng rng(seed);
  return gaussian(rows, cols, stddev, rng);
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

inline double max_abs_diff(const Matrix& a, const Eigen::MatrixXd& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      d = std::max(d, std::abs(a(i, j) - b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  return d;
}

/// Relative error with a small floor so exact zeros compare cleanly.
inline double rel_err(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / scale;
}

/// Symmetric positive definite d x d matrix with eigenvalues spread over `spread` decades.
inline Matrix random_spd(std::size_t d, std::uint64_t seed, double spread = 2.0) {
  Rng rng(seed);
  Matrix g = gaussian(d, d, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(g));
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lam(d);
  for (std::size_t i = 0; i < d; ++i) {
    lam(static_cast<Eigen::Index>(i)) = std::pow(10.0, spread * static_cast<double>(i) / std::max<double>(1.0, d - 1.0));
  }
  Eigen::MatrixXd p = q * lam.asDiagonal() * q.transpose();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out(i, j) = 0.5 * (p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                         p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
  return out;
}

}  // namespace tunecomp::test
