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

#ifndef BEVRPN__IMAGE_HPP_
#define BEVRPN__IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bevrpn
{

/// Interleaved 8-bit RGB image, row-major.
struct Image
{
  int width{0};
  int height{0};
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
  : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill)
  {
  }

  bool empty() const { return width == 0 || height == 0; }

  std::uint8_t & at(int x, int y, int ch) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }
  std::uint8_t at(int x, int y, int ch) const
  {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }

  bool operator==(const Image &) const = default;
};

/// Reads a PNG, converting palette/gray/alpha/16-bit inputs to 8-bit RGB.
Image read_png(const std::filesystem::path & path);
void write_png(const Image & image, const std::filesystem::path & path);

}  // namespace bevrpn

#endif  // BEVRPN__IMAGE_HPP_
