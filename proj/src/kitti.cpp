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

#include "bevrpn/kitti.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

std::string_view class_name(ClassId id)
{
  switch (id) {
    case ClassId::Car:
      return "Car";
    case ClassId::Pedestrian:
      return "Pedestrian";
    case ClassId::Cyclist:
      return "Cyclist";
  }
  return "Unknown";
}

std::optional<ClassId> class_from_index(int index)
{
  if (index < 0 || index >= kNumClasses) {
    return std::nullopt;
  }
  return static_cast<ClassId>(index);
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const
{
  PointCloud out;
  out.num_layers = num_layers;
  out.points.reserve(indices.size());
  for (auto i : indices) {
    out.points.push_back(points.at(i));
  }
  if (reflectance) {
    out.reflectance.emplace();
    out.reflectance->reserve(indices.size());
    for (auto i : indices) {
      out.reflectance->push_back((*reflectance)[i]);
    }
  }
  if (layer_id) {
    out.layer_id.emplace();
    out.layer_id->reserve(indices.size());
    for (auto i : indices) {
      out.layer_id->push_back((*layer_id)[i]);
    }
  }
  return out;
}

void PointCloud::check() const
{
  if (reflectance && reflectance->size() != points.size()) {
    throw ContractViolation("point cloud reflectance length differs from point count");
  }
  if (layer_id) {
    if (layer_id->size() != points.size()) {
      throw ContractViolation("point cloud layer_id length differs from point count");
    }
    for (int id : *layer_id) {
      if (id < 0 || id >= num_layers) {
        throw ContractViolation("layer id " + std::to_string(id) + " outside [0, " +
                                std::to_string(num_layers) + ")");
      }
    }
  }
}

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  } else if (a > std::numbers::pi) {
    a -= two_pi;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Velodyne scans

namespace
{

float load_f32_le(const std::uint8_t * p)
{
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_f32_le(float value, std::vector<std::uint8_t> & out)
{
  const auto bits = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<std::uint8_t>(bits & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFFu));
  out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFFu));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return std::vector<std::uint8_t>(
    std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string slurp_text(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PointCloud decode_velodyne(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() % 16 != 0) {
    throw FormatError(
      "byte length", "velodyne scan length " + std::to_string(bytes.size()) +
                       " is not a multiple of 16");
  }
  const std::size_t n = bytes.size() / 16;
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.reflectance.emplace();
  cloud.reflectance->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t * rec = bytes.data() + 16 * i;
    const float x = load_f32_le(rec);
    const float y = load_f32_le(rec + 4);
    const float z = load_f32_le(rec + 8);
    const float r = load_f32_le(rec + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(r)) {
      throw FormatError(
        "point " + std::to_string(i), "non-finite value in velodyne record " + std::to_string(i));
    }
    cloud.points.push_back(Point3{x, y, z});
    cloud.reflectance->push_back(r);
  }
  return cloud;
}

PointCloud read_velodyne(const std::filesystem::path & path)
{
  const auto bytes = slurp(path);
  return decode_velodyne(bytes);
}

std::vector<std::uint8_t> encode_velodyne(const PointCloud & cloud)
{
  cloud.check();
  std::vector<std::uint8_t> out;
  out.reserve(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto & p = cloud.points[i];
    store_f32_le(static_cast<float>(p.x), out);
    store_f32_le(static_cast<float>(p.y), out);
    store_f32_le(static_cast<float>(p.z), out);
    store_f32_le(cloud.reflectance ? (*cloud.reflectance)[i] : 0.0f, out);
  }
  return out;
}

void write_velodyne(const PointCloud & cloud, const std::filesystem::path & path)
{
  const auto bytes = encode_velodyne(cloud);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Calibration

namespace
{

std::vector<double> parse_doubles(std::string_view text, const std::string & field)
{
  std::vector<double> values;
  std::istringstream ss{std::string(text)};
  std::string tok;
  while (ss >> tok) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw FormatError(field, "cannot parse number '" + tok + "' in " + field);
    }
    values.push_back(v);
  }
  return values;
}

Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d & r, const std::string & what)
{
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-3 || r.determinant() <= 0.0) {
    throw ConfigError(what + " is not a rotation");
  }
  return nearest_rotation(r);
}

}  // namespace

Calibration parse_calibration(std::string_view text, int image_width, int image_height)
{
  std::map<std::string, std::vector<double>, std::less<>> entries;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      continue;
    }
    std::string key = line.substr(0, colon);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    entries[key] = parse_doubles(std::string_view(line).substr(colon + 1), key);
  }

  auto need = [&](std::initializer_list<const char *> keys, std::size_t count) {
    for (const char * key : keys) {
      auto it = entries.find(key);
      if (it != entries.end()) {
        if (it->second.size() != count) {
          throw FormatError(key, std::string(key) + " expects " + std::to_string(count) + " values");
        }
        return it->second;
      }
    }
    throw FormatError(*keys.begin(), std::string("missing calibration key ") + *keys.begin());
  };

  const auto p2 = need({"P2"}, 12);
  const auto r0 = need({"R0_rect", "R_rect"}, 9);
  const auto tr = need({"Tr_velo_to_cam", "Tr_velo_cam"}, 12);

  Calibration c;
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 4; ++k) {
      c.projection(r, k) = p2[r * 4 + k];
      c.velo_to_cam(r, k) = tr[r * 4 + k];
    }
  }
  Eigen::Matrix3d rect;
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) {
      rect(r, k) = r0[r * 3 + k];
    }
  }
  c.rectification.topLeftCorner<3, 3>() = orthonormalized(rect, "R0_rect");
  c.velo_to_cam.topLeftCorner<3, 3>() =
    orthonormalized(c.velo_to_cam.topLeftCorner<3, 3>(), "Tr_velo_to_cam");
  c.image_width = image_width;
  c.image_height = image_height;
  c.validate();
  return c;
}

Calibration read_calibration(const std::filesystem::path & path, int image_width, int image_height)
{
  return parse_calibration(slurp_text(path), image_width, image_height);
}

std::string format_calibration(const Calibration & c)
{
  std::ostringstream out;
  out << std::setprecision(17);
  auto row_major = [&](const char * key, const auto & m) {
    out << key << ':';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        out << ' ' << m(r, k);
      }
    }
    out << '\n';
  };
  row_major("P2", c.projection);
  row_major("R0_rect", Eigen::Matrix3d(c.rectification.topLeftCorner<3, 3>()));
  row_major("Tr_velo_to_cam", Eigen::Matrix<double, 3, 4>(c.velo_to_cam.topRows<3>()));
  return out.str();
}

// ---------------------------------------------------------------------------
// Labels

std::vector<CameraLabel> parse_camera_labels(std::string_view text)
{
  std::vector<CameraLabel> labels;
  std::istringstream lines{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) {
      tok.push_back(t);
    }
    const std::string where = "line " + std::to_string(line_no);
    if (tok.size() != 15 && tok.size() != 16) {
      throw FormatError(where, where + ": expected 15 fields, got " + std::to_string(tok.size()));
    }
    std::vector<double> v;
    v.reserve(14);
    for (std::size_t i = 1; i < 15; ++i) {
      double d = 0.0;
      const auto res = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), d);
      if (res.ec != std::errc() || res.ptr != tok[i].data() + tok[i].size() || !std::isfinite(d)) {
        throw FormatError(where, where + ": bad numeric field '" + tok[i] + "'");
      }
      v.push_back(d);
    }
    CameraLabel lab;
    lab.type = tok[0];
    lab.truncated = v[0];
    lab.occluded = static_cast<int>(v[1]);
    lab.alpha = v[2];
    for (int k = 0; k < 4; ++k) {
      lab.bbox[k] = v[3 + k];
    }
    lab.h = v[7];
    lab.w = v[8];
    lab.l = v[9];
    lab.x = v[10];
    lab.y = v[11];
    lab.z = v[12];
    lab.rotation_y = v[13];
    labels.push_back(lab);
  }
  return labels;
}

std::optional<ClassId> map_kitti_class(std::string_view type)
{
  if (type == "Car" || type == "Van") {
    return ClassId::Car;
  }
  if (type == "Pedestrian") {
    return ClassId::Pedestrian;
  }
  if (type == "Cyclist") {
    return ClassId::Cyclist;
  }
  return std::nullopt;
}

GroundTruthObject camera_label_to_lidar(const CameraLabel & label, ClassId cls, const Calibration & c)
{
  const Point3 bottom = from_rect_camera(Eigen::Vector3d(label.x, label.y, label.z), c);
  // rotation_y is measured about the camera y axis; heading 0 points along camera +x.
  // The heading is the ground-plane direction whose camera x-z projection has
  // that yaw: it lies in the plane spanned by dir_cam and the camera y axis,
  // i.e. it is orthogonal to (sin ry, 0, cos ry). This keeps the conversion an
  // exact inverse of lidar_object_to_camera when the camera is tilted.
  const Eigen::Matrix3d rot = c.velo_to_rect().topLeftCorner<3, 3>();
  const Eigen::Vector3d dir_cam(std::cos(label.rotation_y), 0.0, -std::sin(label.rotation_y));
  const Eigen::Vector3d normal =
    rot.transpose() * Eigen::Vector3d(std::sin(label.rotation_y), 0.0, std::cos(label.rotation_y));
  Eigen::Vector3d dir_lidar(-normal.y(), normal.x(), 0.0);
  if (dir_lidar.norm() < 1e-9) {
    // Camera axis vertical in the LiDAR frame; fall back to the plain rotation.
    dir_lidar = rot.transpose() * dir_cam;
  } else if ((rot * dir_lidar).dot(dir_cam) < 0.0) {
    dir_lidar = -dir_lidar;
  }

  GroundTruthObject obj;
  obj.class_id = cls;
  obj.x = bottom.x;
  obj.y = bottom.y;
  obj.z = bottom.z + 0.5 * label.h;
  obj.h = label.h;
  obj.w = label.w;
  obj.l = label.l;
  obj.theta = wrap_angle(std::atan2(dir_lidar.y(), dir_lidar.x()));
  return obj;
}

CameraLabel lidar_object_to_camera(const GroundTruthObject & obj, const Calibration & c)
{
  const Eigen::Vector3d bottom = to_rect_camera(Point3{obj.x, obj.y, obj.z - 0.5 * obj.h}, c);
  const Eigen::Matrix3d rot = c.velo_to_rect().topLeftCorner<3, 3>();
  const Eigen::Vector3d dir_cam = rot * Eigen::Vector3d(std::cos(obj.theta), std::sin(obj.theta), 0.0);

  CameraLabel lab;
  lab.type = std::string(class_name(obj.class_id));
  lab.h = obj.h;
  lab.w = obj.w;
  lab.l = obj.l;
  lab.x = bottom.x();
  lab.y = bottom.y();
  lab.z = bottom.z();
  lab.rotation_y = wrap_angle(std::atan2(-dir_cam.z(), dir_cam.x()));
  lab.alpha = wrap_angle(lab.rotation_y - std::atan2(lab.x, lab.z));
  return lab;
}

std::vector<GroundTruthObject> parse_labels(std::string_view text, const Calibration & c)
{
  std::vector<GroundTruthObject> out;
  for (const auto & lab : parse_camera_labels(text)) {
    if (auto cls = map_kitti_class(lab.type)) {
      out.push_back(camera_label_to_lidar(lab, *cls, c));
    }
  }
  return out;
}

std::vector<GroundTruthObject> read_labels(const std::filesystem::path & path, const Calibration & c)
{
  return parse_labels(slurp_text(path), c);
}

std::string format_labels(std::span<const CameraLabel> labels)
{
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  for (const auto & lab : labels) {
    out << lab.type << ' ' << lab.truncated << ' ' << lab.occluded << ' ' << lab.alpha;
    for (double b : lab.bbox) {
      out << ' ' << b;
    }
    out << ' ' << lab.h << ' ' << lab.w << ' ' << lab.l << ' ' << lab.x << ' ' << lab.y << ' '
        << lab.z << ' ' << lab.rotation_y << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Layers

PointCloud estimate_layers(PointCloud cloud, int num_layers)
{
  if (num_layers < 1) {
    throw ContractViolation("estimate_layers: num_layers must be >= 1");
  }
  if (cloud.empty()) {
    throw ContractViolation("estimate_layers: cloud is empty");
  }
  std::vector<double> elevation(cloud.size());
  bool any_off_origin = false;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto & p = cloud.points[i];
    const double r = std::hypot(p.x, p.y);
    any_off_origin = any_off_origin || r > 0.0 || p.z != 0.0;
    elevation[i] = std::atan2(p.z, r);
  }
  if (!any_off_origin) {
    throw DegenerateGeometryError("estimate_layers: every point is at the sensor origin");
  }
  const auto [lo_it, hi_it] = std::minmax_element(elevation.begin(), elevation.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;

  std::vector<int> ids(cloud.size(), 0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto bin = static_cast<int>(std::floor((elevation[i] - lo) / span * num_layers));
      ids[i] = std::clamp(bin, 0, num_layers - 1);
    }
  }
  cloud.layer_id = std::move(ids);
  cloud.num_layers = num_layers;
  return cloud;
}

std::optional<ClassId> map_nuscenes_class(
  std::string_view name, std::span<const std::string> attributes)
{
  auto is = [&](std::string_view shortname, std::string_view full) {
    return name == shortname || name == full;
  };
  if (is("car", "vehicle.car")) {
    return ClassId::Car;
  }
  if (name == "pedestrian" || name.starts_with("human.pedestrian")) {
    return ClassId::Pedestrian;
  }
  if (is("bicycle", "vehicle.bicycle")) {
    const bool with_rider = std::any_of(attributes.begin(), attributes.end(), [](const std::string & a) {
      return a == "with rider" || a == "with_rider" || a == "cycle.with_rider";
    });
    if (with_rider) {
      return ClassId::Cyclist;
    }
  }
  return std::nullopt;
}

}  // namespace bevrpn
