// Copyright 2026 The bevrpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bevrpn/exchange.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace bevrpn
{

std::string_view dtype_name(DType d)
{
  switch (d) {
    case DType::F32:
      return "f32";
    case DType::F64:
      return "f64";
    case DType::I32:
      return "i32";
    case DType::U8:
      return "u8";
  }
  return "?";
}

std::optional<DType> parse_dtype(std::string_view name)
{
  for (DType d : {DType::F32, DType::F64, DType::I32, DType::U8}) {
    if (dtype_name(d) == name) {
      return d;
    }
  }
  return std::nullopt;
}

std::size_t dtype_size(DType d)
{
  switch (d) {
    case DType::F32:
    case DType::I32:
      return 4;
    case DType::F64:
      return 8;
    case DType::U8:
      return 1;
  }
  return 0;
}

namespace
{

// Element count with overflow detection; nullopt when the byte size would not fit.
std::optional<std::uint64_t> checked_count(std::span<const std::uint64_t> shape, std::size_t elem)
{
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      return std::nullopt;
    }
    n *= d;
  }
  if (n != 0 && n > std::numeric_limits<std::uint64_t>::max() / elem) {
    return std::nullopt;
  }
  return n;
}

}  // namespace

std::uint64_t TensorRecord::element_count() const
{
  const auto n = checked_count(shape, dtype_size(dtype));
  if (!n) {
    throw ContractViolation("tensor '" + name + "' shape overflows");
  }
  return *n;
}

void TensorRecord::check() const
{
  if (payload.size() != element_count() * dtype_size(dtype)) {
    throw ContractViolation(
      "tensor '" + name + "' payload has " + std::to_string(payload.size()) + " bytes, expected " +
      std::to_string(element_count() * dtype_size(dtype)));
  }
}

std::vector<std::uint8_t> encode_tensor(const TensorRecord & t)
{
  t.check();
  nlohmann::json header;
  header["name"] = t.name;
  header["dtype"] = dtype_name(t.dtype);
  header["shape"] = t.shape;
  header["layout"] = "row-major";
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(12 + text.size() + t.payload.size());
  std::memcpy(out.data(), kTensorMagic.data(), 4);
  detail::store_le<std::uint32_t>(kTensorFormatVersion, out.data() + 4);
  detail::store_le<std::uint32_t>(static_cast<std::uint32_t>(text.size()), out.data() + 8);
  std::memcpy(out.data() + 12, text.data(), text.size());
  std::copy(t.payload.begin(), t.payload.end(), out.begin() + 12 + static_cast<std::ptrdiff_t>(text.size()));
  return out;
}

TensorRecord decode_tensor(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic.data(), 4) != 0) {
    throw FormatError("magic", "bad magic: not an AGNO tensor file");
  }
  if (bytes.size() < 8) {
    throw FormatError("version", "truncated before the format version");
  }
  const auto version = detail::load_le<std::uint32_t>(bytes.data() + 4);
  if (version != kTensorFormatVersion) {
    throw FormatError("version", "unsupported format version " + std::to_string(version));
  }
  if (bytes.size() < 12) {
    throw FormatError("header length", "truncated before the header length");
  }
  const auto header_len = detail::load_le<std::uint32_t>(bytes.data() + 8);
  if (header_len > bytes.size() - 12) {
    throw FormatError("header length", "header length " + std::to_string(header_len) + " exceeds file size");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception & e) {
    throw FormatError("header", std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("name") || !header["name"].is_string() ||
      !header.contains("dtype") || !header["dtype"].is_string() || !header.contains("shape") ||
      !header["shape"].is_array()) {
    throw FormatError("header", "header must carry string name, string dtype and array shape");
  }

  TensorRecord t;
  t.name = header["name"].get<std::string>();
  const auto dtype = parse_dtype(header["dtype"].get<std::string>());
  if (!dtype) {
    throw FormatError("dtype", "unknown dtype '" + header["dtype"].get<std::string>() + "'");
  }
  t.dtype = *dtype;
  if (header.value("layout", std::string("row-major")) != "row-major") {
    throw FormatError("layout", "only row-major layout is supported");
  }
  for (const auto & d : header["shape"]) {
    if (!d.is_number_unsigned()) {
      throw FormatError("shape", "shape entries must be nonnegative integers");
    }
    t.shape.push_back(d.get<std::uint64_t>());
  }
  const auto count = checked_count(t.shape, dtype_size(t.dtype));
  const std::size_t payload_len = bytes.size() - 12 - header_len;
  if (!count || *count * dtype_size(t.dtype) != payload_len) {
    throw FormatError(
      "payload length", "payload length " + std::to_string(payload_len) + " does not match shape and dtype");
  }
  t.payload.assign(bytes.begin() + 12 + header_len, bytes.end());
  return t;
}

void write_file_atomic(const std::filesystem::path & path, std::span<const std::uint8_t> bytes)
{
  static std::atomic<std::uint64_t> counter{0};
  const auto tag = std::hash<std::thread::id>{}(std::this_thread::get_id()) ^ (counter.fetch_add(1) << 20);
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tag);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path & path, std::string_view text)
{
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

void write_tensor(const TensorRecord & t, const std::filesystem::path & path)
{
  write_file_atomic(path, encode_tensor(t));
}

TensorRecord read_tensor(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes(
    (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

// ---------------------------------------------------------------------------

nlohmann::json grid_to_json(const GridSpec & input, const GridSpec & output)
{
  nlohmann::json g;
  g["x_min"] = input.x_min();
  g["x_max"] = input.x_max();
  g["y_min"] = input.y_min();
  g["y_max"] = input.y_max();
  g["s_x"] = input.s_x();
  g["s_y"] = input.s_y();
  g["n_x"] = input.n_x();
  g["n_y"] = input.n_y();
  g["s_x_out"] = output.s_x();
  g["s_y_out"] = output.s_y();
  g["n_x_out"] = output.n_x();
  g["n_y_out"] = output.n_y();
  if (std::isfinite(input.z_min()) || std::isfinite(input.z_max())) {
    g["z_min"] = input.z_min();
    g["z_max"] = input.z_max();
  }
  return g;
}

std::pair<GridSpec, GridSpec> grid_from_json(const nlohmann::json & j)
{
  auto num = [&](const char * key) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw FormatError("grid", std::string("grid is missing numeric '") + key + "'");
    }
    return j[key].get<double>();
  };
  try {
    GridSpec in(num("x_min"), num("x_max"), num("y_min"), num("y_max"), num("s_x"), num("s_y"));
    if (j.contains("z_min") && j.contains("z_max")) {
      in.set_z_range(num("z_min"), num("z_max"));
    }
    GridSpec out = in.with_cell_size(num("s_x_out"), num("s_y_out"));
    if (num("n_x") != in.n_x() || num("n_y") != in.n_y() || num("n_x_out") != out.n_x() ||
        num("n_y_out") != out.n_y()) {
      throw FormatError("grid", "grid cell counts disagree with extents and cell sizes");
    }
    return {in, out};
  } catch (const ConfigError & e) {
    throw FormatError("grid", e.what());
  }
}

nlohmann::json manifest_to_json(const SampleManifest & m)
{
  nlohmann::json j;
  j["format_version"] = kTensorFormatVersion;
  j["sample_id"] = m.sample_id;
  j["tensors"] = m.tensors;
  j["grid"] = grid_to_json(m.input_grid, m.output_grid);
  j["feature_layout"] = m.feature_layout;
  j["augmentation"] = m.augmentation;
  j["provenance"] = m.provenance;
  j["counts"] = m.counts;
  j["config"] = m.config;
  return j;
}

SampleManifest manifest_from_json(const nlohmann::json & j)
{
  if (!j.is_object() || !j.contains("sample_id") || !j.contains("tensors") || !j.contains("grid")) {
    throw FormatError("manifest", "manifest requires sample_id, tensors and grid");
  }
  SampleManifest m;
  m.sample_id = j["sample_id"].get<std::string>();
  m.tensors = j["tensors"].get<std::map<std::string, std::string>>();
  std::tie(m.input_grid, m.output_grid) = grid_from_json(j["grid"]);
  m.feature_layout = j.value("feature_layout", std::string());
  m.augmentation = j.value("augmentation", nlohmann::json::object());
  m.provenance = j.value("provenance", nlohmann::json::object());
  m.counts = j.value("counts", nlohmann::json::object());
  m.config = j.value("config", nlohmann::json::object());
  return m;
}

void write_manifest(const SampleManifest & m, const std::filesystem::path & path)
{
  write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

SampleManifest read_manifest(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception & e) {
    throw FormatError("manifest", path.string() + ": " + e.what());
  }
}

std::vector<std::string> validate_manifest(const SampleManifest & m, const std::filesystem::path & manifest_dir)
{
  std::vector<std::string> problems;
  for (const auto & [role, rel] : m.tensors) {
    const auto path = manifest_dir / rel;
    if (!std::filesystem::exists(path)) {
      problems.push_back(role + ": missing " + path.string());
      continue;
    }
    try {
      (void)read_tensor(path);
    } catch (const std::exception & e) {
      problems.push_back(role + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace bevrpn
