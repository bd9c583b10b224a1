// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/lowrank.hpp"

#include <cmath>
#include <stdexcept>

namespace tunecomp {

namespace {

void require_rank(std::size_t rank, std::size_t d_out, std::size_t d_in, const char* who) {
  if (rank == 0 || rank > std::min(d_out, d_in)) {
    throw std::invalid_argument(std::string(who) + ": rank " + std::to_string(rank) +
                                " outside [1, " + std::to_string(std::min(d_out, d_in)) + "]");
  }
}

const char* split_name(SingularSplit split) {
  switch (split) {
    case SingularSplit::None: return "none";
    case SingularSplit::Left: return "left";
    case SingularSplit::Right: return "right";
    case SingularSplit::Symmetric: return "symmetric";
  }
  return "?";
}

// B = U_r, A = S_r·V_rᵀ·C⁻¹ from the SVD of W·C.
LowRankFactor transformed_factor(const Matrix& w, const Matrix& c, const Matrix& c_inv,
                                 std::size_t rank) {
  LowRankFactor f = truncate_svd(matmul(w, c), rank, SvdBlock::TopR, SingularSplit::Right);
  f.A = matmul(f.A, c_inv);
  return f;
}

void require_stats(const Matrix& w, const CalibrationStats& stats, const char* who) {
  if (stats.dim() != w.cols()) {
    throw DimensionError(std::string(who) + ": calibration dim " + std::to_string(stats.dim()) +
                         " does not match d_in " + std::to_string(w.cols()));
  }
}

}  // namespace

std::string to_string(InitMethod method) {
  switch (method.kind) {
    case InitKind::ZeroGaussian: return "zero-gaussian";
    case InitKind::GaussianGaussian: return "gaussian-gaussian";
    case InitKind::Nystrom: return "nystrom";
    case InitKind::CorDA: return "corda";
    case InitKind::RootCorDA: return "root-corda";
    case InitKind::Svd:
      return std::string("svd-") + (method.block == SvdBlock::TopR ? "top" : "bottom") + "-" +
             split_name(method.split);
  }
  return "?";
}

InitMethod parse_init_method(std::string_view name) {
  for (const InitMethod& m : all_init_methods())
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown init method '" + std::string(name) + "'");
}

std::vector<InitMethod> all_init_methods() {
  std::vector<InitMethod> out = {
      {InitKind::ZeroGaussian},
      {InitKind::GaussianGaussian},
      {InitKind::Nystrom},
  };
  for (SvdBlock block : {SvdBlock::BottomR, SvdBlock::TopR})
    for (SingularSplit split : {SingularSplit::None, SingularSplit::Left, SingularSplit::Right,
                                SingularSplit::Symmetric})
      out.push_back({InitKind::Svd, block, split});
  out.push_back({InitKind::CorDA});
  out.push_back({InitKind::RootCorDA});
  return out;
}

void CalibrationStats::accumulate(const Matrix& batch) {
  if (batch.rows() != dim()) {
    throw DimensionError("CalibrationStats::accumulate: batch has " +
                         std::to_string(batch.rows()) + " rows, expected " +
                         std::to_string(dim()));
  }
  const Matrix outer = matmul_nt(batch, batch);
  auto c = cov_.data();
  auto o = outer.data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o[i];
  count_ += batch.cols();
}

void CalibrationStats::merge(const CalibrationStats& other) {
  if (other.dim() != dim()) throw DimensionError("CalibrationStats::merge: dimension mismatch");
  auto c = cov_.data();
  auto o = other.cov_.data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o[i];
  count_ += other.count_;
}

double CalibrationStats::regularization() const {
  return 1e-6 * trace(cov_) / static_cast<double>(dim());
}

Matrix CalibrationStats::regularized_cov() const {
  if (count_ == 0) throw std::logic_error("CalibrationStats: no samples accumulated");
  Matrix c = cov_;
  const double eps = regularization();
  for (std::size_t i = 0; i < dim(); ++i) c(i, i) += eps;
  return c;
}

CalibrationStats CalibrationStats::from_parts(Matrix cov, std::size_t count) {
  if (cov.rows() != cov.cols()) throw DimensionError("CalibrationStats: covariance not square");
  CalibrationStats s;
  s.cov_ = std::move(cov);
  s.count_ = count;
  return s;
}

LowRankFactor truncate_svd(const Matrix& w, std::size_t rank, SvdBlock block,
                           SingularSplit split) {
  require_rank(rank, w.rows(), w.cols(), "truncate_svd");
  const SvdResult s = svd(w);
  const std::size_t k = s.S.size();
  const std::size_t first = block == SvdBlock::TopR ? 0 : k - rank;

  LowRankFactor f{Matrix(w.rows(), rank), Matrix(rank, w.cols())};
  for (std::size_t j = 0; j < rank; ++j) {
    const double sigma = s.S[first + j];
    double left = 1.0;
    double right = 1.0;
    switch (split) {
      case SingularSplit::None: break;
      case SingularSplit::Left: left = sigma; break;
      case SingularSplit::Right: right = sigma; break;
      case SingularSplit::Symmetric: left = right = std::sqrt(sigma); break;
    }
    for (std::size_t i = 0; i < w.rows(); ++i) f.B(i, j) = left * s.U(i, first + j);
    for (std::size_t i = 0; i < w.cols(); ++i) f.A(j, i) = right * s.V(i, first + j);
  }
  return f;
}

LowRankFactor init_gaussian_pair(std::size_t d_out, std::size_t d_in, std::size_t rank,
                                 bool zero_b, Rng& rng) {
  require_rank(rank, d_out, d_in, "init_gaussian_pair");
  LowRankFactor f;
  f.A = gaussian(rank, d_in, 1.0 / std::sqrt(static_cast<double>(d_in)), rng);
  f.B = zero_b ? Matrix(d_out, rank)
               : gaussian(d_out, rank, 1.0 / std::sqrt(static_cast<double>(rank)), rng);
  return f;
}

LowRankFactor init_nystrom(const Matrix& w0, std::size_t rank, Rng& rng) {
  require_rank(rank, w0.rows(), w0.cols(), "init_nystrom");
  const Matrix g = gaussian(rank, w0.rows(), 1.0 / std::sqrt(static_cast<double>(w0.rows())), rng);
  return {Matrix(w0.rows(), rank), matmul(g, w0)};
}

LowRankFactor init_corda(const Matrix& w, const CalibrationStats& stats, std::size_t rank) {
  require_stats(w, stats, "init_corda");
  require_rank(rank, w.rows(), w.cols(), "init_corda");
  const Matrix c = stats.regularized_cov();
  return transformed_factor(w, c, invert(c), rank);
}

LowRankFactor init_root_corda(const Matrix& w, const CalibrationStats& stats, std::size_t rank) {
  require_stats(w, stats, "init_root_corda");
  require_rank(rank, w.rows(), w.cols(), "init_root_corda");
  if (stats.sample_count() == 0) throw std::logic_error("init_root_corda: no samples accumulated");
  const Matrix c = sym_sqrt(stats.cov(), stats.regularization());
  return transformed_factor(w, c, invert(c), rank);
}

LowRankFactor init_cholesky_whitened(const Matrix& w, const CalibrationStats& stats,
                                     std::size_t rank) {
  require_stats(w, stats, "init_cholesky_whitened");
  require_rank(rank, w.rows(), w.cols(), "init_cholesky_whitened");
  const Matrix c = cholesky(stats.regularized_cov());
  return transformed_factor(w, c, invert(c), rank);
}

LowRankFactor initialize_factor(InitMethod method, const Matrix& w, std::size_t rank,
                                const CalibrationStats* stats, Rng& rng) {
  if (method.needs_calibration() && stats == nullptr) {
    throw std::invalid_argument(to_string(method) + " requires calibration statistics");
  }
  switch (method.kind) {
    case InitKind::ZeroGaussian: return init_gaussian_pair(w.rows(), w.cols(), rank, true, rng);
    case InitKind::GaussianGaussian:
      return init_gaussian_pair(w.rows(), w.cols(), rank, false, rng);
    case InitKind::Nystrom: return init_nystrom(w, rank, rng);
    case InitKind::Svd: return truncate_svd(w, rank, method.block, method.split);
    case InitKind::CorDA: return init_corda(w, *stats, rank);
    case InitKind::RootCorDA: return init_root_corda(w, *stats, rank);
  }
  throw std::logic_error("initialize_factor: unhandled method");
}

double activation_objective(const Matrix& w, const LowRankFactor& f,
                            const CalibrationStats& stats) {
  if (stats.sample_count() == 0) {
    throw std::logic_error("activation_objective: calibration set is empty");
  }
  const Matrix diff = subtract(f.product(), w);
  if (diff.cols() != stats.dim()) throw DimensionError("activation_objective: d_in mismatch");
  const Matrix weighted = matmul(diff, stats.cov());
  double total = 0.0;
  for (std::size_t i = 0; i < diff.rows(); ++i)
    for (std::size_t j = 0; j < diff.cols(); ++j) total += weighted(i, j) * diff(i, j);
  return total;
}

double approximation_error(const Matrix& w, const LowRankFactor& f) {
  return frobenius_norm(subtract(w, f.product()));
}

}  // namespace tunecomp
