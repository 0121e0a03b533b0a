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

#include "bevrpn/decoder.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

std::vector<Peak> find_peaks(const ScoreMap & cls_map, int neighborhood, int top_k)
{
  if (neighborhood < 1 || neighborhood % 2 == 0) {
    throw ContractViolation("find_peaks: neighborhood must be a positive odd integer");
  }
  if (top_k < 0) {
    throw ContractViolation("find_peaks: top_k must be nonnegative");
  }
  const int half = neighborhood / 2;
  const int h = cls_map.height();
  const int w = cls_map.width();
  std::vector<Peak> peaks;
  for (int c = 0; c < cls_map.channels(); ++c) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const double s = cls_map(c, v, u);
        if (!(s > 0.0)) {
          continue;
        }
        bool is_peak = true;
        for (int dv = -half; dv <= half && is_peak; ++dv) {
          const int nv = v + dv;
          if (nv < 0 || nv >= h) {
            continue;
          }
          for (int du = -half; du <= half; ++du) {
            const int nu = u + du;
            if ((dv == 0 && du == 0) || nu < 0 || nu >= w) {
              continue;
            }
            const double n = cls_map(c, nv, nu);
            // A neighbor beats us if higher, or equal and earlier in (v, u) order.
            if (n > s || (n == s && (dv < 0 || (dv == 0 && du < 0)))) {
              is_peak = false;
              break;
            }
          }
        }
        if (is_peak) {
          peaks.push_back(Peak{c, u, v, s});
        }
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak & a, const Peak & b) { return a.score > b.score; });
  if (peaks.size() > static_cast<std::size_t>(top_k)) {
    peaks.resize(static_cast<std::size_t>(top_k));
  }
  return peaks;
}

std::vector<Proposal> decode_proposals(
  std::span<const Peak> peaks, const ScoreMap & reg_map, const GridSpec & g_out, double side_floor)
{
  if (reg_map.channels() != 3 || reg_map.height() != g_out.n_y() || reg_map.width() != g_out.n_x()) {
    throw ContractViolation("decode_proposals: regression map does not match the output grid");
  }
  std::vector<Proposal> out;
  out.reserve(peaks.size());
  for (const auto & pk : peaks) {
    const Point3 center = voxel_center(pk.u, pk.v, g_out);
    Proposal p;
    p.class_id = pk.class_id;
    p.score = pk.score;
    p.cx = center.x - reg_map(0, pk.v, pk.u);
    p.cy = center.y - reg_map(1, pk.v, pk.u);
    p.side = std::max(reg_map(2, pk.v, pk.u), side_floor);
    out.push_back(p);
  }
  return out;
}

std::vector<Proposal> decode(
  const ScoreMap & cls_map, const ScoreMap & reg_map, const GridSpec & g_out, int neighborhood, int top_k,
  double side_floor)
{
  const auto peaks = find_peaks(cls_map, neighborhood, top_k);
  return decode_proposals(peaks, reg_map, g_out, side_floor);
}

std::string format_proposals(std::span<const Proposal> proposals)
{
  std::string out;
  char buf[160];
  for (const auto & p : proposals) {
    std::snprintf(buf, sizeof(buf), "%d %.9g %.9g %.9g %.9g\n", p.class_id, p.score, p.cx, p.cy, p.side);
    out += buf;
  }
  return out;
}

std::vector<Proposal> parse_proposals(std::string_view text)
{
  std::vector<Proposal> out;
  std::istringstream lines{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ss(line);
    Proposal p;
    std::string extra;
    if (!(ss >> p.class_id >> p.score >> p.cx >> p.cy >> p.side) || (ss >> extra)) {
      const std::string where = "line " + std::to_string(line_no);
      throw FormatError(where, where + ": expected 'class score cx cy side'");
    }
    out.push_back(p);
  }
  return out;
}

void write_proposals(std::span<const Proposal> proposals, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << format_proposals(proposals);
}

std::vector<Proposal> read_proposals(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_proposals(ss.str());
}

}  // namespace bevrpn
