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

#include "bevrpn/voxelizer.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

std::array<double, kFeatureDim> VoxelFeature::flatten() const
{
  std::array<double, kFeatureDim> out{};
  std::copy(mean.begin(), mean.end(), out.begin());
  std::copy(cov.begin(), cov.end(), out.begin() + 3);
  std::copy(extremes.begin(), extremes.end(), out.begin() + 9);
  return out;
}

std::vector<ColumnVoxel> voxelize(const PointCloud & cloud, const GridSpec & g)
{
  // (cell key, point index); key orders cells by u then v.
  std::vector<std::pair<std::size_t, std::size_t>> keyed;
  keyed.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (auto cell = bev_index(cloud.points[i], g)) {
      const auto key = static_cast<std::size_t>(cell->u) * g.n_y() + cell->v;
      keyed.emplace_back(key, i);
    }
  }
  std::sort(keyed.begin(), keyed.end());

  std::vector<ColumnVoxel> voxels;
  for (std::size_t i = 0; i < keyed.size();) {
    const auto key = keyed[i].first;
    ColumnVoxel vox;
    vox.u = static_cast<int>(key / g.n_y());
    vox.v = static_cast<int>(key % g.n_y());
    for (; i < keyed.size() && keyed[i].first == key; ++i) {
      vox.point_indices.push_back(keyed[i].second);
    }
    voxels.push_back(std::move(vox));
  }
  return voxels;
}

namespace
{

std::array<double, 3> mean_of(std::span<const Point3> points)
{
  // Accumulate offsets from the first point to limit cancellation for
  // far-away voxels.
  const Point3 ref = points.front();
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  for (const auto & p : points) {
    sx += p.x - ref.x;
    sy += p.y - ref.y;
    sz += p.z - ref.z;
  }
  const auto n = static_cast<double>(points.size());
  return {ref.x + sx / n, ref.y + sy / n, ref.z + sz / n};
}

}  // namespace

VoxelFeature ndt_encode(std::span<const Point3> points)
{
  if (points.empty()) {
    throw ContractViolation("ndt_encode: empty point set");
  }
  VoxelFeature f;
  f.mean = mean_of(points);

  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[3] = {-lo[0], -lo[1], -lo[2]};
  for (const auto & p : points) {
    const double dx = p.x - f.mean[0];
    const double dy = p.y - f.mean[1];
    const double dz = p.z - f.mean[2];
    xx += dx * dx;
    xy += dx * dy;
    xz += dx * dz;
    yy += dy * dy;
    yz += dy * dz;
    zz += dz * dz;
    lo[0] = std::min(lo[0], p.x);
    lo[1] = std::min(lo[1], p.y);
    lo[2] = std::min(lo[2], p.z);
    hi[0] = std::max(hi[0], p.x);
    hi[1] = std::max(hi[1], p.y);
    hi[2] = std::max(hi[2], p.z);
  }
  const auto n = static_cast<double>(points.size());
  f.cov = {xx / n, xy / n, xz / n, yy / n, yz / n, zz / n};
  f.extremes = {lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]};
  // The mean can drift an ulp past a bound when all points share a coordinate.
  for (int k = 0; k < 3; ++k) {
    f.mean[k] = std::clamp(f.mean[k], lo[k], hi[k]);
  }
  return f;
}

std::size_t main_point_index(std::span<const Point3> points)
{
  if (points.empty()) {
    throw ContractViolation("main_point: empty point set");
  }
  const auto m = mean_of(points);
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - m[0];
    const double dy = points[i].y - m[1];
    const double dz = points[i].z - m[2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    // Distances equal up to rounding count as ties and keep the lower index.
    if (i == 0 || d2 < best_d2 - kMainPointTieTolerance * best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Point3 main_point(std::span<const Point3> points) { return points[main_point_index(points)]; }

EncodedSample encode_sample(
  const PointCloud & cloud, const GridSpec & g, const Calibration & c, const EncodeOptions & options)
{
  const Projector project(c);
  EncodedSample out;
  out.grid = g;

  const auto voxels = voxelize(cloud, g);
  std::vector<Point3> members;
  for (const auto & vox : voxels) {
    members.clear();
    for (auto i : vox.point_indices) {
      members.push_back(cloud.points[i]);
    }
    const Point3 mp = main_point(members);
    auto pix = project(mp);
    if (!pix) {
      if (!options.keep_off_image) {
        continue;
      }
      pix = Pixel{-1.0, -1.0};
    }
    const auto feat = ndt_encode(members).flatten();
    std::array<float, kFeatureDim> row{};
    std::transform(feat.begin(), feat.end(), row.begin(), [](double d) { return static_cast<float>(d); });
    out.features.push_back(row);
    out.bev_indices.push_back(CellIndex{vox.u, vox.v});
    out.image_coords.push_back(*pix);
    out.main_points.push_back(mp);
  }
  return out;
}

}  // namespace bevrpn
