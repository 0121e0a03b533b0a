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

#ifndef BEVRPN__VOXELIZER_HPP_
#define BEVRPN__VOXELIZER_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/kitti.hpp"

namespace bevrpn
{

/// Occupied BEV cell extended over the full vertical range (a pillar).
struct ColumnVoxel
{
  int u{0};
  int v{0};
  std::vector<std::size_t> point_indices;
};

inline constexpr int kFeatureDim = 15;

/// Name recorded alongside serialized features so consumers can check the layout.
inline constexpr std::string_view kFeatureLayout =
  "mean(x,y,z)|cov(xx,xy,xz,yy,yz,zz)|min(x,y,z)|max(x,y,z)";

/// Normal distribution transform of the points in one voxel plus their bounds.
struct VoxelFeature
{
  std::array<double, 3> mean{};
  /// Upper triangle of the population covariance: xx, xy, xz, yy, yz, zz.
  std::array<double, 6> cov{};
  /// min x, y, z then max x, y, z.
  std::array<double, 6> extremes{};

  std::array<double, kFeatureDim> flatten() const;
};

/// One voxel per occupied cell, sorted by (u, v); member indices ascend.
std::vector<ColumnVoxel> voxelize(const PointCloud & cloud, const GridSpec & g);

VoxelFeature ndt_encode(std::span<const Point3> points);

/// Squared distances within this relative margin of each other are ties.
inline constexpr double kMainPointTieTolerance = 1e-10;

/// Member point closest to the mean; ties go to the lowest index.
Point3 main_point(std::span<const Point3> points);
std::size_t main_point_index(std::span<const Point3> points);

struct EncodeOptions
{
  /// Keep voxels whose main point does not project into the image. Their
  /// image coordinates are set to (-1, -1). Used by the LiDAR-only variant.
  bool keep_off_image{false};
};

/// Everything the network consumes for one scene, one row per retained voxel.
struct EncodedSample
{
  std::vector<std::array<float, kFeatureDim>> features;
  std::vector<CellIndex> bev_indices;
  std::vector<Pixel> image_coords;
  std::vector<Point3> main_points;
  GridSpec grid{GridSpec::default_input()};

  std::size_t size() const { return bev_indices.size(); }
};

EncodedSample encode_sample(
  const PointCloud & cloud, const GridSpec & g, const Calibration & c,
  const EncodeOptions & options = {});

}  // namespace bevrpn

#endif  // BEVRPN__VOXELIZER_HPP_
