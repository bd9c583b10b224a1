// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/tensor_io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace tunecomp {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "TCT1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'T', 'C', 'T', '1'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  template <typename T>
  T get(const char* field) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw TensorError(TensorErrorKind::TruncatedPayload,
                        origin_ + ": truncated while reading " + field);
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const char* cursor() const { return bytes_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorError(TensorErrorKind::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TensorError(TensorErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw TensorError(TensorErrorKind::Io, "write failed for " + path.string());
}

std::string file_name_for(const std::string& name) {
  std::string f;
  for (char c : name) f += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') ? c : '_';
  return f + ".tct";
}

}  // namespace

const char* to_string(TensorErrorKind kind) {
  switch (kind) {
    case TensorErrorKind::Io: return "Io";
    case TensorErrorKind::BadMagic: return "BadMagic";
    case TensorErrorKind::DtypeMismatch: return "DtypeMismatch";
    case TensorErrorKind::TruncatedPayload: return "TruncatedPayload";
    case TensorErrorKind::TrailingData: return "TrailingData";
    case TensorErrorKind::ShapeMismatch: return "ShapeMismatch";
  }
  return "?";
}

std::uint64_t Tensor::numel() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor to_tensor(const Matrix& m) {
  auto d = m.data();
  return {{m.rows(), m.cols()}, std::vector<double>(d.begin(), d.end())};
}

Tensor to_tensor(const Vector& v) { return {{v.size()}, v}; }

Matrix to_matrix(const Tensor& t) {
  if (t.dims.size() != 2) {
    throw TensorError(TensorErrorKind::ShapeMismatch,
                      "expected a 2-d tensor, got ndim " + std::to_string(t.dims.size()));
  }
  return Matrix(t.dims[0], t.dims[1], t.values);
}

Vector to_vector(const Tensor& t) {
  if (t.dims.size() != 1) {
    throw TensorError(TensorErrorKind::ShapeMismatch,
                      "expected a 1-d tensor, got ndim " + std::to_string(t.dims.size()));
  }
  return t.values;
}

std::string encode_tensor(const Tensor& t) {
  if (t.numel() != t.values.size()) {
    throw TensorError(TensorErrorKind::ShapeMismatch, "tensor dims do not match value count");
  }
  std::string out(kMagic, 4);
  put<std::uint8_t>(out, kDtypeF64);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put<std::uint64_t>(out, d);
  const auto* raw = reinterpret_cast<const char*>(t.values.data());
  out.append(raw, t.values.size() * sizeof(double));
  return out;
}

Tensor decode_tensor(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw TensorError(TensorErrorKind::BadMagic, origin + ": missing TCT1 magic");
  }
  Reader r(bytes, origin);
  r.skip(4);
  const auto dtype = r.get<std::uint8_t>("dtype");
  if (dtype != kDtypeF64) {
    throw TensorError(TensorErrorKind::DtypeMismatch,
                      origin + ": dtype code " + std::to_string(dtype) + ", expected 2 (f64)");
  }
  const auto ndim = r.get<std::uint32_t>("ndim");
  Tensor t;
  for (std::uint32_t i = 0; i < ndim; ++i) t.dims.push_back(r.get<std::uint64_t>("dims"));
  const std::uint64_t n = t.numel();
  if (n > r.remaining() / sizeof(double)) {
    throw TensorError(TensorErrorKind::TruncatedPayload,
                      origin + ": payload holds " + std::to_string(r.remaining()) + " bytes, need " +
                          std::to_string(n * sizeof(double)));
  }
  t.values.resize(n);
  std::memcpy(t.values.data(), r.cursor(), n * sizeof(double));
  r.skip(n * sizeof(double));
  if (r.remaining() != 0) {
    throw TensorError(TensorErrorKind::TrailingData,
                      origin + ": " + std::to_string(r.remaining()) + " bytes after payload");
  }
  return t;
}

void save_tensor(const fs::path& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

Tensor load_tensor(const fs::path& path) { return decode_tensor(read_file(path), path.string()); }

void save_matrix(const fs::path& path, const Matrix& m) { save_tensor(path, to_tensor(m)); }

Matrix load_matrix(const fs::path& path) { return to_matrix(load_tensor(path)); }

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "TCT1";
  manifest["kind"] = ckpt.kind;
  manifest["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ckpt.meta) manifest["meta"][k] = v;
  manifest["tensors"] = nlohmann::ordered_json::object();
  for (const auto& [name, t] : ckpt.tensors) {
    const std::string file = file_name_for(name);
    save_tensor(dir / file, t);
    manifest["tensors"][name] = {{"file", file}, {"shape", t.dims}};
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw TensorError(TensorErrorKind::Io, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("checkpoint not found: " + manifest_path.string());
  }
  std::ifstream in(manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.kind = manifest.value("kind", "");
  if (manifest.contains("meta")) {
    for (const auto& [k, v] : manifest["meta"].items()) ckpt.meta[k] = v.get<std::int64_t>();
  }
  for (const auto& [name, entry] : manifest.at("tensors").items()) {
    Tensor t = load_tensor(dir / entry.at("file").get<std::string>());
    if (t.dims != entry.at("shape").get<std::vector<std::uint64_t>>()) {
      throw TensorError(TensorErrorKind::ShapeMismatch,
                        dir.string() + ": tensor '" + name + "' shape disagrees with manifest");
    }
    ckpt.tensors.emplace(name, std::move(t));
  }
  return ckpt;
}

Checkpoint to_checkpoint(const DenseModel& model) {
  Checkpoint c;
  c.kind = "dense-model";
  const auto& layers = model.layers();
  c.meta["layers"] = static_cast<std::int64_t>(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    c.tensors["layer" + std::to_string(i) + ".weight"] = to_tensor(layers[i].weight);
    c.tensors["layer" + std::to_string(i) + ".bias"] = to_tensor(layers[i].bias);
  }
  return c;
}

namespace {

const Tensor& require_tensor(const Checkpoint& c, const std::string& name) {
  auto it = c.tensors.find(name);
  if (it == c.tensors.end()) throw std::runtime_error("checkpoint has no tensor '" + name + "'");
  return it->second;
}

std::int64_t require_meta(const Checkpoint& c, const std::string& key) {
  auto it = c.meta.find(key);
  if (it == c.meta.end() || it->second < 0) {
    throw std::runtime_error("checkpoint has no valid meta '" + key + "'");
  }
  return it->second;
}

}  // namespace

DenseModel dense_model_from(const Checkpoint& ckpt) {
  if (ckpt.kind != "dense-model") throw std::runtime_error("checkpoint kind '" + ckpt.kind + "' is not dense-model");
  const auto n = static_cast<std::size_t>(require_meta(ckpt, "layers"));
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = "layer" + std::to_string(i);
    layers.push_back({to_matrix(require_tensor(ckpt, p + ".weight")),
                      to_vector(require_tensor(ckpt, p + ".bias"))});
  }
  return DenseModel(std::move(layers));
}

Checkpoint to_checkpoint(const std::vector<CalibrationStats>& stats) {
  Checkpoint c;
  c.kind = "calibration";
  c.meta["layers"] = static_cast<std::int64_t>(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    c.tensors["layer" + std::to_string(i) + ".cov"] = to_tensor(stats[i].cov());
    c.meta["layer" + std::to_string(i) + ".samples"] = static_cast<std::int64_t>(stats[i].sample_count());
  }
  return c;
}

std::vector<CalibrationStats> calibration_from(const Checkpoint& ckpt) {
  if (ckpt.kind != "calibration") throw std::runtime_error("checkpoint kind '" + ckpt.kind + "' is not calibration");
  const auto n = static_cast<std::size_t>(require_meta(ckpt, "layers"));
  std::vector<CalibrationStats> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = "layer" + std::to_string(i);
    out.push_back(CalibrationStats::from_parts(to_matrix(require_tensor(ckpt, p + ".cov")),
                                               static_cast<std::size_t>(require_meta(ckpt, p + ".samples"))));
  }
  return out;
}

}  // namespace tunecomp
