// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

#include "tunecomp/matrix.hpp"

namespace tunecomp {

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin SVD W = U·diag(S)·Vᵀ with k = min(rows, cols).
///
/// S is sorted descending. Each column of U is sign-normalized so that its
/// largest-magnitude entry is positive (first such entry on ties); V follows.
struct SvdResult {
  Matrix U;  // rows x k
  Vector S;  // k
  Matrix V;  // cols x k
};

/// One-sided Jacobi SVD. Stops when the largest normalized column
/// inner product falls below 1e-12, or after 60 sweeps.
SvdResult svd(const Matrix& w);

/// Eigendecomposition P = E·diag(values)·Eᵀ of a symmetric matrix,
/// values sorted descending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // columns are eigenvectors
};

SymmetricEigen symmetric_eigen(const Matrix& p);

/// Lower-triangular L with L·Lᵀ = P.
/// Throws NotPositiveDefinite when a pivot drops to 1e-12·max(diag) or below.
Matrix cholesky(const Matrix& p);

/// E·diag(sqrt(max(λ, 0) + eps))·Eᵀ.
Matrix sym_sqrt(const Matrix& p, double eps);
/// sym_sqrt with eps = 1e-8·trace(P)/dim.
Matrix sym_sqrt(const Matrix& p);

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrix when a
/// pivot vanishes or the 1-norm condition number exceeds 1e12.
Matrix invert(const Matrix& c);

/// Throws DimensionError unless `p` is square and symmetric within `tol`.
void require_symmetric(const Matrix& p, double tol, const char* who);

}  // namespace tunecomp
