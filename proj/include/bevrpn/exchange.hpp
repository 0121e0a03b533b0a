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

#ifndef BEVRPN__EXCHANGE_HPP_
#define BEVRPN__EXCHANGE_HPP_

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bevrpn/errors.hpp"
#include "bevrpn/geometry.hpp"

namespace bevrpn
{

// Tensor container:
//   "AGNO" | u32 LE version (=1) | u32 LE header length H | H bytes JSON | payload
// The JSON header holds {"dtype", "layout", "name", "shape"}; the payload is the
// row-major little-endian element data.

inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::string_view kTensorMagic = "AGNO";

enum class DType { F32, F64, I32, U8 };

std::string_view dtype_name(DType d);
std::optional<DType> parse_dtype(std::string_view name);
std::size_t dtype_size(DType d);

template <typename T>
constexpr DType dtype_of()
{
  if constexpr (std::is_same_v<T, float>) {
    return DType::F32;
  } else if constexpr (std::is_same_v<T, double>) {
    return DType::F64;
  } else if constexpr (std::is_same_v<T, std::int32_t>) {
    return DType::I32;
  } else {
    static_assert(std::is_same_v<T, std::uint8_t>, "unsupported tensor element type");
    return DType::U8;
  }
}

struct TensorRecord
{
  std::string name;
  DType dtype{DType::F32};
  std::vector<std::uint64_t> shape;
  std::vector<std::uint8_t> payload;

  /// Product of the shape; 1 for a scalar (empty shape).
  std::uint64_t element_count() const;
  /// Throws ContractViolation when the payload length disagrees with dtype x shape.
  void check() const;

  bool operator==(const TensorRecord &) const = default;
};

namespace detail
{

template <typename T>
void store_le(T value, std::uint8_t * out)
{
  std::memcpy(out, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(out, out + sizeof(T));
  }
}

template <typename T>
T load_le(const std::uint8_t * in)
{
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, in, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace detail

template <typename T>
TensorRecord make_tensor(std::string name, std::vector<std::uint64_t> shape, std::span<const T> values)
{
  TensorRecord t;
  t.name = std::move(name);
  t.dtype = dtype_of<T>();
  t.shape = std::move(shape);
  if (t.element_count() != values.size()) {
    throw ContractViolation("make_tensor: value count does not match shape for '" + t.name + "'");
  }
  t.payload.resize(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    detail::store_le(values[i], t.payload.data() + i * sizeof(T));
  }
  return t;
}

template <typename T>
std::vector<T> tensor_values(const TensorRecord & t)
{
  if (t.dtype != dtype_of<T>()) {
    throw FormatError("dtype", "tensor '" + t.name + "' has dtype " + std::string(dtype_name(t.dtype)));
  }
  t.check();
  std::vector<T> out(t.payload.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = detail::load_le<T>(t.payload.data() + i * sizeof(T));
  }
  return out;
}

std::vector<std::uint8_t> encode_tensor(const TensorRecord & t);
/// Throws FormatError whose field() is one of: magic, version, header length,
/// header, dtype, layout, shape, payload length.
TensorRecord decode_tensor(std::span<const std::uint8_t> bytes);

/// Atomic write: temporary file in the same directory, then rename.
void write_tensor(const TensorRecord & t, const std::filesystem::path & path);
TensorRecord read_tensor(const std::filesystem::path & path);

void write_file_atomic(const std::filesystem::path & path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path & path, std::string_view text);

// --- sample manifests -------------------------------------------------------

nlohmann::json grid_to_json(const GridSpec & input, const GridSpec & output);
/// Inverse of grid_to_json; throws FormatError("grid") on missing keys or
/// counts that disagree with the extents.
std::pair<GridSpec, GridSpec> grid_from_json(const nlohmann::json & j);

struct SampleManifest
{
  std::string sample_id;
  /// Role -> tensor path relative to the manifest's directory.
  std::map<std::string, std::string> tensors;
  GridSpec input_grid{GridSpec::default_input()};
  GridSpec output_grid{GridSpec::default_output()};
  std::string feature_layout;
  nlohmann::json augmentation = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const SampleManifest & m);
SampleManifest manifest_from_json(const nlohmann::json & j);

void write_manifest(const SampleManifest & m, const std::filesystem::path & path);
SampleManifest read_manifest(const std::filesystem::path & path);

/// Checks that every referenced tensor exists and parses. Returns the problems found.
std::vector<std::string> validate_manifest(const SampleManifest & m, const std::filesystem::path & manifest_dir);

}  // namespace bevrpn

#endif  // BEVRPN__EXCHANGE_HPP_
