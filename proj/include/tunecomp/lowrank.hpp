// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tunecomp/linalg.hpp"
#include "tunecomp/matrix.hpp"
#include "tunecomp/rng.hpp"

namespace tunecomp {

/// W ≈ B·A with B: d_out x r and A: r x d_in.
struct LowRankFactor {
  Matrix B;
  Matrix A;

  std::size_t rank() const { return A.rows(); }
  Matrix product() const { return matmul(B, A); }
};

/// How the retained singular values are distributed between B and A.
enum class SingularSplit {
  None,       // B = U,        A = Vᵀ
  Left,       // B = U·S,      A = Vᵀ
  Right,      // B = U,        A = S·Vᵀ
  Symmetric,  // B = U·S^½,    A = S^½·Vᵀ
};

/// Which end of the spectrum is kept.
enum class SvdBlock {
  TopR,     // largest r singular triplets
  BottomR,  // smallest r singular triplets
};

enum class InitKind { ZeroGaussian, GaussianGaussian, Nystrom, Svd, CorDA, RootCorDA };

/// One row of the initialization menu. `block` and `split` only matter for Svd.
struct InitMethod {
  InitKind kind = InitKind::Svd;
  SvdBlock block = SvdBlock::TopR;
  SingularSplit split = SingularSplit::Symmetric;

  bool operator==(const InitMethod&) const = default;
  bool needs_calibration() const {
    return kind == InitKind::CorDA || kind == InitKind::RootCorDA;
  }
};

/// Stable identifiers, e.g. "zero-gaussian", "svd-top-symmetric", "root-corda".
std::string to_string(InitMethod method);
/// Inverse of to_string; throws std::invalid_argument on unknown names.
InitMethod parse_init_method(std::string_view name);
/// Every initialization in menu order (13 entries).
std::vector<InitMethod> all_init_methods();

/// Streaming accumulator of XXᵀ over calibration activations (columns are samples).
class CalibrationStats {
 public:
  CalibrationStats() = default;
  explicit CalibrationStats(std::size_t dim) : cov_(dim, dim) {}

  std::size_t dim() const { return cov_.rows(); }
  std::size_t sample_count() const { return count_; }
  const Matrix& cov() const { return cov_; }

  void accumulate(const Matrix& batch);
  void merge(const CalibrationStats& other);

  /// 1e-6·trace(cov)/dim; added to the diagonal before inversion or square roots.
  double regularization() const;
  /// cov + regularization()·I. Throws when no samples were accumulated.
  Matrix regularized_cov() const;

  /// Restores a saved accumulator; `cov` must be square.
  static CalibrationStats from_parts(Matrix cov, std::size_t count);

 private:
  Matrix cov_;
  std::size_t count_ = 0;
};

/// Rank-r truncated SVD factor of W with the chosen block and split.
LowRankFactor truncate_svd(const Matrix& w, std::size_t rank, SvdBlock block, SingularSplit split);

/// A ~ N(0, 1/d_in); B ~ N(0, 1/r) or zero.
LowRankFactor init_gaussian_pair(std::size_t d_out, std::size_t d_in, std::size_t rank,
                                 bool zero_b, Rng& rng);

/// B = 0, A = G·W₀ with G: r x d_out ~ N(0, 1/d_out).
LowRankFactor init_nystrom(const Matrix& w0, std::size_t rank, Rng& rng);

/// SVD of W·C, B = U_r, A = S_r·V_rᵀ·C⁻¹ with C = cov + eps·I.
LowRankFactor init_corda(const Matrix& w, const CalibrationStats& stats, std::size_t rank);

/// As init_corda with C = (cov + eps·I)^½; minimizes ‖(BA − W)X‖_F².
LowRankFactor init_root_corda(const Matrix& w, const CalibrationStats& stats, std::size_t rank);

/// As init_corda with C = cholesky(cov + eps·I); the whitening construction.
LowRankFactor init_cholesky_whitened(const Matrix& w, const CalibrationStats& stats,
                                     std::size_t rank);

/// Dispatches on `method`. `stats` may be null unless the method needs calibration.
LowRankFactor initialize_factor(InitMethod method, const Matrix& w, std::size_t rank,
                                const CalibrationStats* stats, Rng& rng);

/// trace((BA − W)·cov·(BA − W)ᵀ), which equals ‖(BA − W)X‖_F² when cov = XXᵀ.
double activation_objective(const Matrix& w, const LowRankFactor& f, const CalibrationStats& stats);

/// ‖W − BA‖_F.
double approximation_error(const Matrix& w, const LowRankFactor& f);

}  // namespace tunecomp
