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

#include "bevrpn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "bevrpn/augment.hpp"
#include "bevrpn/exchange.hpp"

namespace bevrpn
{

namespace fs = std::filesystem;

namespace
{

constexpr double kGroundZ = -1.73;
constexpr double kMaxRange = 80.0;
// Horizontal distance of a surrounding wall, so every ring returns points.
constexpr double kWallRadius = 70.0;

double deg(double d) { return d * std::numbers::pi / 180.0; }

// Ray from the origin against an oriented box; returns the entry distance.
std::optional<double> ray_box(const Eigen::Vector3d & d, const GroundTruthObject & o)
{
  const double c = std::cos(o.theta);
  const double s = std::sin(o.theta);
  // Into the box frame (length along local x).
  const Eigen::Vector3d origin(-(c * o.x + s * o.y), -(-s * o.x + c * o.y), -o.z);
  const Eigen::Vector3d dir(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
  const Eigen::Vector3d half(o.l / 2, o.w / 2, o.h / 2);
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-12) {
      if (std::abs(origin[a]) > half[a]) {
        return std::nullopt;
      }
      continue;
    }
    double ta = (-half[a] - origin[a]) / dir[a];
    double tb = (half[a] - origin[a]) / dir[a];
    if (ta > tb) {
      std::swap(ta, tb);
    }
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) {
      return std::nullopt;
    }
  }
  return t0 > 0.0 ? std::optional<double>(t0) : std::nullopt;
}

bool overlaps(const GroundTruthObject & a, const GroundTruthObject & b)
{
  const double ra = 0.5 * std::hypot(a.w, a.l);
  const double rb = 0.5 * std::hypot(b.w, b.l);
  return std::hypot(a.x - b.x, a.y - b.y) < ra + rb + 0.3;
}

GroundTruthObject random_object(RngStream & rng)
{
  GroundTruthObject o;
  const double r = rng.uniform01();
  if (r < 0.6) {
    o.class_id = ClassId::Car;
    o.h = rng.uniform(1.4, 1.7);
    o.w = rng.uniform(1.5, 1.9);
    o.l = rng.uniform(3.5, 4.6);
  } else if (r < 0.8) {
    o.class_id = ClassId::Pedestrian;
    o.h = rng.uniform(1.5, 1.9);
    o.w = rng.uniform(0.5, 0.8);
    o.l = rng.uniform(0.5, 1.0);
  } else {
    o.class_id = ClassId::Cyclist;
    o.h = rng.uniform(1.6, 1.9);
    o.w = rng.uniform(0.5, 0.8);
    o.l = rng.uniform(1.6, 1.9);
  }
  o.x = rng.uniform(6.0, 42.0);
  const double y_lim = std::min(18.0, 0.45 * o.x);
  o.y = rng.uniform(-y_lim, y_lim);
  o.z = kGroundZ + o.h / 2;
  o.theta = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  return o;
}

std::array<Point3, 8> box_corners(const GroundTruthObject & o)
{
  std::array<Point3, 8> out;
  const double c = std::cos(o.theta);
  const double s = std::sin(o.theta);
  int i = 0;
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      for (double sz : {-0.5, 0.5}) {
        const double lx = sx * o.l;
        const double ly = sy * o.w;
        out[i++] = {o.x + c * lx - s * ly, o.y + s * lx + c * ly, o.z + sz * o.h};
      }
    }
  }
  return out;
}

const char * kitti_type(ClassId c)
{
  switch (c) {
    case ClassId::Car:
      return "Car";
    case ClassId::Pedestrian:
      return "Pedestrian";
    case ClassId::Cyclist:
      return "Cyclist";
  }
  return "DontCare";
}

void draw_scene(SyntheticScene & s)
{
  const int w = s.calib.image_width;
  const int h = s.calib.image_height;
  s.image = Image(w, h);
  for (int y = 0; y < h; ++y) {
    const auto sky = static_cast<std::uint8_t>(120 + 100 * (h - y) / h);
    for (int x = 0; x < w; ++x) {
      const bool ground = y > h / 2;
      s.image.at(x, y, 0) = ground ? 90 : sky / 2;
      s.image.at(x, y, 1) = ground ? 90 : sky / 2 + 20;
      s.image.at(x, y, 2) = ground ? 80 : sky;
    }
  }
  const std::uint8_t colors[3][3] = {{200, 40, 40}, {40, 200, 40}, {40, 40, 220}};
  // Far objects first so near ones paint over them.
  std::vector<const GroundTruthObject *> order;
  for (const auto & o : s.objects) {
    order.push_back(&o);
  }
  std::sort(order.begin(), order.end(), [](auto * a, auto * b) { return a->x > b->x; });
  for (const auto * o : order) {
    const Eigen::Matrix<double, 3, 4> pr = s.calib.projection * s.calib.velo_to_rect();
    double x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (const auto & p : box_corners(*o)) {
      const Eigen::Vector3d q = pr * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
      if (q.z() <= 0) {
        continue;
      }
      x0 = std::min(x0, q.x() / q.z());
      x1 = std::max(x1, q.x() / q.z());
      y0 = std::min(y0, q.y() / q.z());
      y1 = std::max(y1, q.y() / q.z());
    }
    const int ix0 = std::clamp(static_cast<int>(x0), 0, w);
    const int ix1 = std::clamp(static_cast<int>(x1), 0, w);
    const int iy0 = std::clamp(static_cast<int>(y0), 0, h);
    const int iy1 = std::clamp(static_cast<int>(y1), 0, h);
    const auto & col = colors[static_cast<int>(o->class_id)];
    for (int y = iy0; y < iy1; ++y) {
      for (int x = ix0; x < ix1; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          s.image.at(x, y, ch) = col[ch];
        }
      }
    }
  }
}

std::vector<CameraLabel> camera_labels(const SyntheticScene & s)
{
  std::vector<CameraLabel> out;
  const Eigen::Matrix<double, 3, 4> pr = s.calib.projection * s.calib.velo_to_rect();
  for (const auto & o : s.objects) {
    CameraLabel l = lidar_object_to_camera(o, s.calib);
    l.type = kitti_type(o.class_id);
    double x0 = s.calib.image_width - 1.0, y0 = s.calib.image_height - 1.0, x1 = 0.0, y1 = 0.0;
    for (const auto & p : box_corners(o)) {
      const Eigen::Vector3d q = pr * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
      if (q.z() > 0) {
        x0 = std::min(x0, q.x() / q.z());
        x1 = std::max(x1, q.x() / q.z());
        y0 = std::min(y0, q.y() / q.z());
        y1 = std::max(y1, q.y() / q.z());
      }
    }
    l.bbox[0] = std::max(0.0, x0);
    l.bbox[1] = std::max(0.0, y0);
    l.bbox[2] = std::min(s.calib.image_width - 1.0, x1);
    l.bbox[3] = std::min(s.calib.image_height - 1.0, y1);
    out.push_back(l);
  }
  return out;
}

}  // namespace

Calibration synthetic_calibration(std::uint64_t seed, std::size_t index)
{
  RngStream rng(seed ^ 0xCA11B, index);
  Calibration c;
  Eigen::Matrix3d base;
  base << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  const Eigen::Matrix3d tilt =
    (Eigen::AngleAxisd(deg(rng.uniform(-0.5, 0.5)), Eigen::Vector3d::UnitX()) *
     Eigen::AngleAxisd(deg(rng.uniform(-0.5, 0.5)), Eigen::Vector3d::UnitY()))
      .toRotationMatrix();
  c.velo_to_cam.block<3, 3>(0, 0) = tilt * base;
  c.velo_to_cam.block<3, 1>(0, 3) = Eigen::Vector3d(-0.004, -0.076, -0.27);
  const Eigen::Matrix3d r0 =
    Eigen::AngleAxisd(deg(rng.uniform(-0.2, 0.2)), Eigen::Vector3d::UnitZ()).toRotationMatrix();
  c.rectification.block<3, 3>(0, 0) = r0;
  c.projection << 721.5377, 0.0, 609.5593, 44.85728, 0.0, 721.5377, 172.854, 0.2163791, 0.0, 0.0, 1.0, 0.002745884;
  c.image_width = 1242;
  c.image_height = 375;
  return c;
}

SyntheticScene make_synthetic_scene(const SyntheticOptions & options, std::size_t index)
{
  SyntheticScene s;
  s.calib = synthetic_calibration(options.seed, index);
  RngStream rng(options.seed, index);

  const int n_obj = static_cast<int>(rng.uniform_int(1, std::max(1, options.max_objects)));
  for (int attempt = 0; attempt < 50 && static_cast<int>(s.objects.size()) < n_obj; ++attempt) {
    const auto o = random_object(rng);
    if (std::none_of(s.objects.begin(), s.objects.end(), [&](const auto & e) { return overlaps(o, e); })) {
      s.objects.push_back(o);
    }
  }

  const double lo = deg(-24.8);
  const double hi = deg(2.0);
  const double fov = deg(options.azimuth_fov_deg);
  std::vector<float> refl;
  std::vector<int> rings;
  for (int ring = 0; ring < options.num_layers; ++ring) {
    const double phi =
      options.num_layers > 1 ? lo + (hi - lo) * ring / (options.num_layers - 1) : 0.5 * (lo + hi);
    for (int k = 0; k < options.azimuth_steps; ++k) {
      const double az = -0.5 * fov + fov * (k + 0.5) / options.azimuth_steps;
      const Eigen::Vector3d d(std::cos(phi) * std::cos(az), std::cos(phi) * std::sin(az), std::sin(phi));
      double t = kWallRadius / std::cos(phi);
      float r = 0.1f;
      if (d.z() < 0 && kGroundZ / d.z() < t) {
        t = kGroundZ / d.z();
        r = 0.2f;
      }
      for (const auto & o : s.objects) {
        if (auto hit = ray_box(d, o); hit && *hit < t) {
          t = *hit;
          r = 0.6f;
        }
      }
      if (t > kMaxRange) {
        continue;
      }
      t += rng.uniform(-0.01, 0.01);
      s.cloud.points.push_back({t * d.x(), t * d.y(), t * d.z()});
      refl.push_back(static_cast<float>(std::clamp(r + rng.uniform(-0.1, 0.1), 0.0, 1.0)));
      rings.push_back(ring);
    }
  }
  s.cloud.reflectance = std::move(refl);
  s.cloud.layer_id = std::move(rings);
  s.cloud.num_layers = options.num_layers;

  if (options.write_images) {
    draw_scene(s);
  }
  return s;
}

void write_synthetic_kitti(const fs::path & root, const SyntheticOptions & options)
{
  const fs::path base = root / "training";
  for (const char * sub : {"velodyne", "calib", "label_2"}) {
    fs::create_directories(base / sub);
  }
  if (options.write_images) {
    fs::create_directories(base / "image_2");
  }
  for (int i = 0; i < options.num_samples; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "%06d", i);
    const auto s = make_synthetic_scene(options, static_cast<std::size_t>(i));
    write_velodyne(s.cloud, base / "velodyne" / (std::string(id) + ".bin"));
    write_file_atomic(base / "calib" / (std::string(id) + ".txt"), format_calibration(s.calib));
    write_file_atomic(base / "label_2" / (std::string(id) + ".txt"), format_labels(camera_labels(s)));
    if (options.write_images) {
      write_png(s.image, base / "image_2" / (std::string(id) + ".png"));
    }
  }
}

}  // namespace bevrpn
