// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tunecomp {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double trace(const Matrix& a);

/// Columns [begin, begin + count) of `a`.
Matrix column_block(const Matrix& a, std::size_t begin, std::size_t count);
Matrix hstack(const Matrix& left, const Matrix& right);

/// Adds `bias` to every column of `a` in place.
void add_column_broadcast(Matrix& a, std::span<const double> bias);
/// Sum of each row, i.e. a·1.
Vector row_sums(const Matrix& a);

inline Matrix operator+(const Matrix& a, const Matrix& b) { return add(a, b); }
inline Matrix operator-(const Matrix& a, const Matrix& b) { return subtract(a, b); }
inline Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }
inline Matrix operator*(double s, const Matrix& a) { return scale(a, s); }

}  // namespace tunecomp
