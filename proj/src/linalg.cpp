// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tunecomp {

namespace {

constexpr int kMaxSvdSweeps = 60;
constexpr double kSvdTolerance = 1e-12;
constexpr int kMaxEigenSweeps = 100;
constexpr double kConditionLimit = 1e12;

using Columns = std::vector<Vector>;

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void rotate(Vector& p, Vector& q, double c, double s) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p[i];
    const double y = q[i];
    p[i] = c * x - s * y;
    q[i] = s * x + c * y;
  }
}

Columns to_columns(const Matrix& a) {
  Columns cols(a.cols(), Vector(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) cols[j][i] = a(i, j);
  return cols;
}

Matrix from_columns(const Columns& cols, std::size_t rows) {
  Matrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  return m;
}

// Index of the first entry with the largest magnitude.
std::size_t dominant_index(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

// Extends `basis` with unit vectors orthogonal to every existing column,
// filling the slots flagged in `missing`. Candidates are standard basis
// vectors taken in order, so the result is deterministic.
void complete_basis(Columns& basis, const std::vector<bool>& missing, std::size_t dim) {
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (!missing[j]) continue;
    while (candidate < dim) {
      Vector v(dim, 0.0);
      v[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
          if (k == j || (missing[k] && k > j)) continue;
          const double proj = dot(basis[k], v);
          for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * basis[k][i];
        }
      }
      const double norm = std::sqrt(dot(v, v));
      if (norm > 0.5) {
        for (double& x : v) x /= norm;
        basis[j] = std::move(v);
        break;
      }
    }
  }
}

SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Columns work = to_columns(a);
  Columns v(n, Vector(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  for (int sweep = 0; sweep < kMaxSvdSweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(work[p], work[p]);
        const double beta = dot(work[q], work[q]);
        const double gamma = dot(work[p], work[q]);
        if (alpha == 0.0 || beta == 0.0 || gamma == 0.0) continue;
        const double ratio = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, ratio);
        if (ratio < 1e-16) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(work[p], work[q], c, s);
        rotate(v[p], v[q], c, s);
      }
    }
    if (worst < kSvdTolerance) break;
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(work[j], work[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double largest = n == 0 ? 0.0 : sigma[order.front()];
  Columns u(n, Vector(m, 0.0));
  Columns vs(n);
  Vector s(n);
  std::vector<bool> missing(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    s[k] = sigma[j];
    vs[k] = v[j];
    if (sigma[j] == 0.0 || sigma[j] <= largest * 1e-15) {
      missing[k] = true;
    } else {
      for (std::size_t i = 0; i < m; ++i) u[k][i] = work[j][i] / sigma[j];
    }
  }
  complete_basis(u, missing, m);

  for (std::size_t k = 0; k < n; ++k) {
    if (u[k][dominant_index(u[k])] < 0.0) {
      for (double& x : u[k]) x = -x;
      for (double& x : vs[k]) x = -x;
    }
  }
  return {from_columns(u, m), std::move(s), from_columns(vs, n)};
}

void flip_sign_by_u(SvdResult& r) {
  for (std::size_t k = 0; k < r.U.cols(); ++k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.U.rows(); ++i)
      if (std::abs(r.U(i, k)) > std::abs(r.U(best, k))) best = i;
    if (r.U(best, k) < 0.0) {
      for (std::size_t i = 0; i < r.U.rows(); ++i) r.U(i, k) = -r.U(i, k);
      for (std::size_t i = 0; i < r.V.rows(); ++i) r.V(i, k) = -r.V(i, k);
    }
  }
}

double one_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

void require_symmetric(const Matrix& p, double tol, const char* who) {
  if (p.rows() != p.cols()) {
    throw DimensionError(std::string(who) + ": matrix must be square, got " + shape_string(p));
  }
  const double bound = tol * std::max(1.0, max_abs(p));
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = i + 1; j < p.cols(); ++j)
      if (std::abs(p(i, j) - p(j, i)) > bound) {
        throw DimensionError(std::string(who) + ": matrix is not symmetric");
      }
}

SvdResult svd(const Matrix& w) {
  if (w.empty()) throw DimensionError("svd: empty matrix");
  if (!w.all_finite()) throw NonFiniteError("svd: non-finite input");
  if (w.rows() >= w.cols()) return svd_tall(w);
  SvdResult t = svd_tall(transpose(w));
  SvdResult r{std::move(t.V), std::move(t.S), std::move(t.U)};
  flip_sign_by_u(r);
  return r;
}

SymmetricEigen symmetric_eigen(const Matrix& p) {
  require_symmetric(p, 1e-10, "symmetric_eigen");
  if (!p.all_finite()) throw NonFiniteError("symmetric_eigen: non-finite input");
  const std::size_t n = p.rows();
  Matrix a = p;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (p(i, j) + p(j, i));
  Matrix e = Matrix::identity(n);
  const double scale = frobenius_norm(a);

  for (int sweep = 0; sweep < kMaxEigenSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;

    for (std::size_t pi = 0; pi + 1 < n; ++pi) {
      for (std::size_t q = pi + 1; q < n; ++q) {
        const double apq = a(pi, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(pi, pi)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, pi);
          const double akq = a(k, q);
          a(k, pi) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(pi, k);
          const double aqk = a(q, k);
          a(pi, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(pi, q) = a(q, pi) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double ekp = e(k, pi);
          const double ekq = e(k, q);
          e(k, pi) = c * ekp - s * ekq;
          e(k, q) = s * ekp + c * ekq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.values[k] = a(j, j);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(e(i, j)) > std::abs(e(best, j))) best = i;
    const double sign = e(best, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * e(i, j);
  }
  return out;
}

Matrix cholesky(const Matrix& p) {
  require_symmetric(p, 1e-10, "cholesky");
  if (!p.all_finite()) throw NonFiniteError("cholesky: non-finite input");
  const std::size_t n = p.rows();
  double diag_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(p(i, i)));
  const double tol = 1e-12 * diag_max;

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = p(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) + " is " +
                                std::to_string(pivot) + "; regularize the covariance");
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = p(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix sym_sqrt(const Matrix& p, double eps) {
  const SymmetricEigen eig = symmetric_eigen(p);
  const std::size_t n = p.rows();
  Matrix scaled = eig.vectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0) + eps);
    for (std::size_t i = 0; i < n; ++i) scaled(i, k) *= root;
  }
  Matrix q = matmul_nt(scaled, eig.vectors);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) q(i, j) = q(j, i) = 0.5 * (q(i, j) + q(j, i));
  return q;
}

Matrix sym_sqrt(const Matrix& p) {
  require_symmetric(p, 1e-10, "sym_sqrt");
  return sym_sqrt(p, 1e-8 * trace(p) / static_cast<double>(p.rows()));
}

Matrix invert(const Matrix& c) {
  if (c.rows() != c.cols() || c.empty()) {
    throw DimensionError("invert: matrix must be square and nonempty, got " + shape_string(c));
  }
  if (!c.all_finite()) throw NonFiniteError("invert: non-finite input");
  const std::size_t n = c.rows();
  Matrix a = c;
  Matrix inv = Matrix::identity(n);
  const double scale = max_abs(c);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot_row = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot_row, col))) pivot_row = r;
    const double pivot = a(pivot_row, col);
    if (pivot == 0.0 || std::abs(pivot) <= 1e-300 * std::max(scale, 1.0)) {
      throw SingularMatrix("invert: zero pivot in column " + std::to_string(col));
    }
    if (pivot_row != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(col, j), a(pivot_row, j));
        std::swap(inv(col, j), inv(pivot_row, j));
      }
    }
    const double inv_pivot = 1.0 / pivot;
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) *= inv_pivot;
      inv(col, j) *= inv_pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= factor * a(col, j);
        inv(r, j) -= factor * inv(col, j);
      }
    }
  }
  const double condition = one_norm(c) * one_norm(inv);
  if (!std::isfinite(condition) || condition > kConditionLimit) {
    throw SingularMatrix("invert: condition estimate " + std::to_string(condition) +
                         " exceeds 1e12");
  }
  return inv;
}

}  // namespace tunecomp
