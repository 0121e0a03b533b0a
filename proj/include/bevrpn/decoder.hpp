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

#ifndef BEVRPN__DECODER_HPP_
#define BEVRPN__DECODER_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/maps.hpp"

namespace bevrpn
{

struct Aabb
{
  double x_lo{0.0};
  double y_lo{0.0};
  double x_hi{0.0};
  double y_hi{0.0};

  double area() const { return (x_hi - x_lo) * (y_hi - y_lo); }
};

/// Scored square BEV region: center (cx, cy) and side length.
struct Proposal
{
  int class_id{0};
  double score{0.0};
  double cx{0.0};
  double cy{0.0};
  double side{0.0};

  Aabb aabb() const { return {cx - 0.5 * side, cy - 0.5 * side, cx + 0.5 * side, cy + 0.5 * side}; }
};

struct Peak
{
  int class_id{0};
  int u{0};
  int v{0};
  double score{0.0};
};

inline constexpr int kDefaultTopK = 20;
inline constexpr int kDefaultNeighborhood = 3;
inline constexpr double kDefaultSideFloor = 0.1;

/// Local maxima of each class channel over a neighborhood x neighborhood window.
/// Equal scores in a window go to the smallest (v, u). Cells with score <= 0 are
/// never peaks. Sorted by score descending (then class, v, u), truncated to top_k.
std::vector<Peak> find_peaks(const ScoreMap & cls_map, int neighborhood = kDefaultNeighborhood, int top_k = kDefaultTopK);

std::vector<Proposal> decode_proposals(
  std::span<const Peak> peaks, const ScoreMap & reg_map, const GridSpec & g_out,
  double side_floor = kDefaultSideFloor);

/// find_peaks followed by decode_proposals.
std::vector<Proposal> decode(
  const ScoreMap & cls_map, const ScoreMap & reg_map, const GridSpec & g_out,
  int neighborhood = kDefaultNeighborhood, int top_k = kDefaultTopK, double side_floor = kDefaultSideFloor);

/// `class score cx cy side` per line, 9 significant digits.
std::string format_proposals(std::span<const Proposal> proposals);
std::vector<Proposal> parse_proposals(std::string_view text);
void write_proposals(std::span<const Proposal> proposals, const std::filesystem::path & path);
std::vector<Proposal> read_proposals(const std::filesystem::path & path);

}  // namespace bevrpn

#endif  // BEVRPN__DECODER_HPP_
