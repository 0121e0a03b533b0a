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

#include "bevrpn/targets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

namespace
{

// IoU of an len_u x len_v box with itself shifted by (r, r).
double diagonal_shift_iou(double len_u, double len_v, double r)
{
  const double iu = std::max(0.0, len_u - r);
  const double iv = std::max(0.0, len_v - r);
  const double inter = iu * iv;
  return inter / (2.0 * len_u * len_v - inter);
}

}  // namespace

bool TargetMaps::reg_positive(int v, int u) const
{
  for (int c = 0; c < pos_mask.channels(); ++c) {
    if (pos_mask(c, v, u)) {
      return true;
    }
  }
  return false;
}

int gaussian_radius(double w, double l, const GridSpec & g_out, double min_overlap)
{
  if (!(w > 0.0) || !(l > 0.0)) {
    throw ContractViolation("gaussian_radius: object dimensions must be positive");
  }
  if (!(min_overlap > 0.0 && min_overlap < 1.0)) {
    throw ContractViolation("gaussian_radius: min_overlap must lie in (0, 1)");
  }
  const double a = l / g_out.s_x();
  const double b = w / g_out.s_y();
  // IoU(r) >= t  <=>  (a - r)(b - r) >= 2 t a b / (1 + t), smaller root of the quadratic.
  const double c = a * b - 2.0 * min_overlap * a * b / (1.0 + min_overlap);
  const double disc = std::max(0.0, (a + b) * (a + b) - 4.0 * c);
  const double root = 0.5 * ((a + b) - std::sqrt(disc));
  auto r = static_cast<int>(std::floor(std::max(0.0, root)));
  // Settle rounding at integer boundaries against the defining inequality.
  while (r > 0 && diagonal_shift_iou(a, b, r) < min_overlap) {
    --r;
  }
  while (diagonal_shift_iou(a, b, r + 1) >= min_overlap) {
    ++r;
  }
  return std::max(1, r);
}

TargetMaps encode_targets(
  std::span<const GroundTruthObject> labels, const GridSpec & g_out, const TargetOptions & options)
{
  const int nc = options.n_classes;
  if (nc < 1) {
    throw ContractViolation("encode_targets: n_classes must be positive");
  }
  TargetMaps t;
  t.cls = ScoreMap(nc, g_out.n_y(), g_out.n_x(), 0.0);
  t.reg = ScoreMap(3, g_out.n_y(), g_out.n_x(), 0.0);
  t.pos_mask = MaskMap(nc, g_out.n_y(), g_out.n_x(), 0);

  auto footprint = [&](std::size_t i) { return labels[i].w * labels[i].l; };

  // Winner per (class, cell): larger footprint, earlier label on ties.
  std::map<std::pair<int, CellIndex>, std::size_t> winners;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto & obj = labels[i];
    const int c = static_cast<int>(obj.class_id);
    if (c < 0 || c >= nc) {
      throw ContractViolation("encode_targets: class id outside [0, n_classes)");
    }
    const auto cell = bev_index(Point3{obj.x, obj.y, obj.z}, g_out);
    if (!cell) {
      ++t.skipped_out_of_bounds;
      continue;
    }
    auto [it, inserted] = winners.try_emplace({c, *cell}, i);
    if (!inserted) {
      ++t.collisions;
      if (footprint(i) > footprint(it->second)) {
        it->second = i;
      }
    }
  }

  std::map<CellIndex, std::size_t> reg_owner;
  for (const auto & [key, i] : winners) {
    const auto & [c, cell] = key;
    const auto & obj = labels[i];
    t.pos_mask(c, cell.v, cell.u) = 1;
    ++t.num_pos;

    auto [it, inserted] = reg_owner.try_emplace(cell, i);
    if (!inserted) {
      ++t.shared_cells;
      if (footprint(i) > footprint(it->second) ||
          (footprint(i) == footprint(it->second) && i < it->second)) {
        it->second = i;
      }
    }

    const int radius = gaussian_radius(obj.w, obj.l, g_out, options.min_overlap);
    const double sigma = radius / 3.0;
    const double denom = 2.0 * sigma * sigma;
    for (int dv = -radius; dv <= radius; ++dv) {
      const int v = cell.v + dv;
      if (v < 0 || v >= g_out.n_y()) {
        continue;
      }
      for (int du = -radius; du <= radius; ++du) {
        const int u = cell.u + du;
        if (u < 0 || u >= g_out.n_x()) {
          continue;
        }
        const double val = std::exp(-(du * du + dv * dv) / denom);
        auto & slot = t.cls(c, v, u);
        slot = std::max(slot, val);
      }
    }
  }

  for (const auto & [cell, i] : reg_owner) {
    const auto & obj = labels[i];
    const Point3 center = voxel_center(cell.u, cell.v, g_out);
    t.reg(0, cell.v, cell.u) = center.x - obj.x;
    t.reg(1, cell.v, cell.u) = center.y - obj.y;
    t.reg(2, cell.v, cell.u) = std::sqrt(obj.w * obj.w + obj.l * obj.l);
  }
  return t;
}

}  // namespace bevrpn
