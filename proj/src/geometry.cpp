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

#include "bevrpn/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

namespace
{

// Absorbs representation error in ratios such as 0.3 / 0.1 before flooring.
constexpr double kCountSlack = 1e-9;

int derive_count(double lo, double hi, double step)
{
  return static_cast<int>(std::floor((hi - lo) / step + kCountSlack));
}

std::optional<int> axis_index(double value, double lo, double hi, double step, int count)
{
  if (!(value >= lo && value < hi)) {
    return std::nullopt;
  }
  auto idx = static_cast<int>(std::floor((value - lo) / step));
  if (idx >= count) {
    // Rounding can push a value just below `hi` onto index `count`; values past
    // the last whole cell are outside the grid.
    if (value < lo + count * step) {
      idx = count - 1;
    } else {
      return std::nullopt;
    }
  }
  return idx;
}

}  // namespace

GridSpec::GridSpec(double x_min, double x_max, double y_min, double y_max, double s_x, double s_y)
: x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), s_x_(s_x), s_y_(s_y)
{
  if (!(s_x > 0.0) || !(s_y > 0.0)) {
    throw ConfigError("grid cell size must be positive");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw ConfigError("grid upper bounds must exceed lower bounds");
  }
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
      !std::isfinite(y_max)) {
    throw ConfigError("grid bounds must be finite");
  }
  n_x_ = derive_count(x_min, x_max, s_x);
  n_y_ = derive_count(y_min, y_max, s_y);
  if (n_x_ < 1 || n_y_ < 1) {
    throw ConfigError("grid must contain at least one cell per axis");
  }
}

GridSpec GridSpec::default_input() { return GridSpec(0.0, 50.0, -25.0, 25.0, 0.0625, 0.0625); }

GridSpec GridSpec::default_output() { return GridSpec(0.0, 50.0, -25.0, 25.0, 0.25, 0.25); }

void GridSpec::set_z_range(double z_min, double z_max)
{
  if (!(z_max > z_min)) {
    throw ConfigError("z range must satisfy z_max > z_min");
  }
  z_min_ = z_min;
  z_max_ = z_max;
}

GridSpec GridSpec::with_cell_size(double s_x, double s_y) const
{
  GridSpec g(x_min_, x_max_, y_min_, y_max_, s_x, s_y);
  g.z_min_ = z_min_;
  g.z_max_ = z_max_;
  return g;
}

std::optional<CellIndex> bev_index(const Point3 & p, const GridSpec & g)
{
  if (!(p.z >= g.z_min() && p.z <= g.z_max())) {
    return std::nullopt;
  }
  const auto u = axis_index(p.x, g.x_min(), g.x_max(), g.s_x(), g.n_x());
  if (!u) {
    return std::nullopt;
  }
  const auto v = axis_index(p.y, g.y_min(), g.y_max(), g.s_y(), g.n_y());
  if (!v) {
    return std::nullopt;
  }
  return CellIndex{*u, *v};
}

Point3 voxel_center(int u, int v, const GridSpec & g)
{
  if (u < 0 || u >= g.n_x() || v < 0 || v >= g.n_y()) {
    throw ContractViolation(
      "voxel_center: cell (" + std::to_string(u) + ", " + std::to_string(v) +
      ") outside grid " + std::to_string(g.n_x()) + "x" + std::to_string(g.n_y()));
  }
  return Point3{g.x_min() + (u + 0.5) * g.s_x(), g.y_min() + (v + 0.5) * g.s_y(), 0.0};
}

void Calibration::validate() const
{
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("calibration image size must be positive");
  }
  if (!velo_to_cam.allFinite() || !rectification.allFinite() || !projection.allFinite()) {
    throw ConfigError("calibration contains non-finite entries");
  }
  const Eigen::Matrix3d r = velo_to_cam.topLeftCorner<3, 3>();
  const double ortho_err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6 || r.determinant() <= 0.0) {
    throw ConfigError("velo_to_cam rotation is not orthonormal (error " +
                      std::to_string(ortho_err) + ")");
  }
  const Eigen::Matrix3d k = projection.leftCols<3>();
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(k);
  const auto & sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(2) <= sv(0) * 1e-12) {
    throw ConfigError("projection matrix is singular");
  }
}

Calibration make_pinhole(double f, double cx, double cy, int width, int height)
{
  Calibration c;
  c.projection << f, 0, cx, 0, 0, f, cy, 0, 0, 0, 1, 0;
  c.image_width = width;
  c.image_height = height;
  return c;
}

Eigen::Vector3d to_rect_camera(const Point3 & p, const Calibration & c)
{
  const Eigen::Vector4d h = c.velo_to_rect() * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
  return h.head<3>() / h(3);
}

Point3 from_rect_camera(const Eigen::Vector3d & cam, const Calibration & c)
{
  const Eigen::Vector4d h = c.velo_to_rect().inverse() * cam.homogeneous();
  return Point3{h(0) / h(3), h(1) / h(3), h(2) / h(3)};
}

Projector::Projector(const Calibration & c) : calib_(c), velo_to_rect_(c.velo_to_rect())
{
  calib_.validate();
}

std::optional<Pixel> Projector::operator()(const Point3 & p) const
{
  const Eigen::Vector4d cam = velo_to_rect_ * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
  if (!(cam(2) > 0.0)) {
    return std::nullopt;
  }
  const Eigen::Vector3d h = calib_.projection * cam;
  if (!(h(2) > 0.0)) {
    return std::nullopt;
  }
  const double px = h(0) / h(2);
  const double py = h(1) / h(2);
  if (!(px >= 0.0 && px < calib_.image_width && py >= 0.0 && py < calib_.image_height)) {
    return std::nullopt;
  }
  return Pixel{px, py};
}

std::optional<Pixel> project_point(const Point3 & p, const Calibration & c) { return Projector(c)(p); }

std::vector<std::optional<Pixel>> project_to_image(
  std::span<const Point3> points, const Calibration & c)
{
  const Projector project(c);
  std::vector<std::optional<Pixel>> out;
  out.reserve(points.size());
  for (const auto & p : points) {
    out.push_back(project(p));
  }
  return out;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d & m)
{
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace bevrpn
