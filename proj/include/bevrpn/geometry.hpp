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

#ifndef BEVRPN__GEOMETRY_HPP_
#define BEVRPN__GEOMETRY_HPP_

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace bevrpn
{

/// LiDAR-frame point: x forward, y left, z up (meters).
struct Point3
{
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const Point3 &, const Point3 &) = default;
};

struct CellIndex
{
  int u{0};
  int v{0};

  friend bool operator==(const CellIndex &, const CellIndex &) = default;
  friend auto operator<=>(const CellIndex &, const CellIndex &) = default;
};

struct Pixel
{
  double px{0.0};
  double py{0.0};
};

/// Regular BEV grid over [x_min, x_max) x [y_min, y_max).
///
/// Cell counts are derived as floor(extent / cell size). The vertical range is
/// unbounded unless z_min / z_max are set; no z filtering is applied by default.
class GridSpec
{
public:
  GridSpec(double x_min, double x_max, double y_min, double y_max, double s_x, double s_y);

  /// Input grid of the detector: (0, 50) x (-25, 25) m at 0.0625 m, 800 x 800 cells.
  static GridSpec default_input();
  /// Output grid of the detector heads: same extent at 0.25 m, 200 x 200 cells.
  static GridSpec default_output();

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double s_x() const { return s_x_; }
  double s_y() const { return s_y_; }
  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  std::size_t num_cells() const { return static_cast<std::size_t>(n_x_) * n_y_; }

  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  void set_z_range(double z_min, double z_max);

  /// Same extent and z range with a different cell size.
  GridSpec with_cell_size(double s_x, double s_y) const;

  bool operator==(const GridSpec &) const = default;

private:
  double x_min_;
  double x_max_;
  double y_min_;
  double y_max_;
  double s_x_;
  double s_y_;
  int n_x_;
  int n_y_;
  double z_min_{-std::numeric_limits<double>::infinity()};
  double z_max_{std::numeric_limits<double>::infinity()};
};

std::optional<CellIndex> bev_index(const Point3 & p, const GridSpec & g);

/// Metric center of cell (u, v). Throws ContractViolation when out of range.
Point3 voxel_center(int u, int v, const GridSpec & g);

/// KITTI-style camera model: rectified camera <- velodyne, then a 3x4 projection.
struct Calibration
{
  Eigen::Matrix4d velo_to_cam{Eigen::Matrix4d::Identity()};
  Eigen::Matrix4d rectification{Eigen::Matrix4d::Identity()};
  Eigen::Matrix<double, 3, 4> projection{Eigen::Matrix<double, 3, 4>::Zero()};
  int image_width{0};
  int image_height{0};

  /// Throws ConfigError unless the extrinsic rotation is orthonormal (1e-6),
  /// the left 3x3 block of the projection is nonsingular and the image size is positive.
  void validate() const;

  /// Full rigid transform velodyne -> rectified camera.
  Eigen::Matrix4d velo_to_rect() const { return rectification * velo_to_cam; }
};

/// Pinhole calibration with identity extrinsics, mostly for tests and tooling.
Calibration make_pinhole(double f, double cx, double cy, int width, int height);

Eigen::Vector3d to_rect_camera(const Point3 & p, const Calibration & c);
Point3 from_rect_camera(const Eigen::Vector3d & cam, const Calibration & c);

/// Projects one point; empty when depth <= 0 or outside [0, w) x [0, h).
std::optional<Pixel> project_point(const Point3 & p, const Calibration & c);

/// Calibration validated once, then applied to many points.
class Projector
{
public:
  explicit Projector(const Calibration & c);

  std::optional<Pixel> operator()(const Point3 & p) const;
  const Calibration & calibration() const { return calib_; }

private:
  Calibration calib_;
  Eigen::Matrix4d velo_to_rect_;
};

/// Projects every point. Validates the calibration once.
std::vector<std::optional<Pixel>> project_to_image(
  std::span<const Point3> points, const Calibration & c);

/// Nearest rotation to `m` (SVD polar factor). Used to clean up calibration
/// matrices printed with limited precision.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d & m);

}  // namespace bevrpn

#endif  // BEVRPN__GEOMETRY_HPP_
