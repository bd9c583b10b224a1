// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunecomp/lowrank.hpp"
#include "tunecomp/matrix.hpp"
#include "tunecomp/model.hpp"

namespace tunecomp {

/// TCT1 layout, little-endian:
///   "TCT1" | dtype u8 (2 = f64) | ndim u32 | dims u64 × ndim | payload (row-major)
enum class TensorErrorKind { Io, BadMagic, DtypeMismatch, TruncatedPayload, TrailingData, ShapeMismatch };

const char* to_string(TensorErrorKind kind);

class TensorError : public std::runtime_error {
 public:
  TensorError(TensorErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TensorErrorKind kind() const { return kind_; }

 private:
  TensorErrorKind kind_;
};

inline constexpr std::uint8_t kDtypeF64 = 2;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  std::uint64_t numel() const;
  bool operator==(const Tensor&) const = default;
};

Tensor to_tensor(const Matrix& m);
Tensor to_tensor(const Vector& v);
/// Requires ndim == 2.
Matrix to_matrix(const Tensor& t);
/// Requires ndim == 1.
Vector to_vector(const Tensor& t);

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::string& bytes, const std::string& origin = "<memory>");

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// Directory of tensor files plus manifest.json mapping names to files and shapes.
/// `meta` holds scalar integers (sample counts and the like).
struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::int64_t> meta;
  std::string kind;
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
/// Throws std::runtime_error naming the path if the directory or manifest is missing.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

Checkpoint to_checkpoint(const DenseModel& model);
DenseModel dense_model_from(const Checkpoint& ckpt);
Checkpoint to_checkpoint(const std::vector<CalibrationStats>& stats);
std::vector<CalibrationStats> calibration_from(const Checkpoint& ckpt);

}  // namespace tunecomp
