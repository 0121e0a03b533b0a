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

#ifndef BEVRPN__MAPS_HPP_
#define BEVRPN__MAPS_HPP_

#include <cstddef>
#include <vector>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

/// Dense channels x height x width map, row-major, indexed (c, v, u).
template <typename T>
class Map3
{
public:
  Map3() = default;
  Map3(int channels, int height, int width, T fill = T{})
  : channels_(channels), height_(height), width_(width),
    data_(static_cast<std::size_t>(channels) * height * width, fill)
  {
    if (channels < 0 || height < 0 || width < 0) {
      throw ContractViolation("Map3: negative dimension");
    }
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  template <typename U>
  bool same_shape(const Map3<U> & o) const
  {
    return channels_ == o.channels() && height_ == o.height() && width_ == o.width();
  }

  std::size_t offset(int c, int v, int u) const
  {
    return (static_cast<std::size_t>(c) * height_ + v) * width_ + u;
  }
  T & operator()(int c, int v, int u) { return data_[offset(c, v, u)]; }
  const T & operator()(int c, int v, int u) const { return data_[offset(c, v, u)]; }

  std::vector<T> & data() { return data_; }
  const std::vector<T> & data() const { return data_; }

  bool operator==(const Map3 &) const = default;

private:
  int channels_{0};
  int height_{0};
  int width_{0};
  std::vector<T> data_;
};

using ScoreMap = Map3<double>;
using MaskMap = Map3<unsigned char>;

}  // namespace bevrpn

#endif  // BEVRPN__MAPS_HPP_
