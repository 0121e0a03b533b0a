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

#ifndef BEVRPN__KITTI_HPP_
#define BEVRPN__KITTI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bevrpn/geometry.hpp"

namespace bevrpn
{

enum class ClassId : int { Car = 0, Pedestrian = 1, Cyclist = 2 };

inline constexpr int kNumClasses = 3;

std::string_view class_name(ClassId id);
std::optional<ClassId> class_from_index(int index);

/// N LiDAR points with optional per-point reflectance and layer (ring) ids.
struct PointCloud
{
  std::vector<Point3> points;
  std::optional<std::vector<float>> reflectance;
  std::optional<std::vector<int>> layer_id;
  /// Number of layers the ids refer to; 0 when layer_id is absent.
  int num_layers{0};

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Copy of the points at `indices` (in that order), carrying parallel channels.
  PointCloud select(std::span<const std::size_t> indices) const;

  /// Throws ContractViolation if channel lengths or layer ids are inconsistent.
  void check() const;
};

/// Ground-truth box in the LiDAR frame; (x, y, z) is the box center.
struct GroundTruthObject
{
  ClassId class_id{ClassId::Car};
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double h{0.0};
  double w{0.0};
  double l{0.0};
  double theta{0.0};
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

PointCloud read_velodyne(const std::filesystem::path & path);
PointCloud decode_velodyne(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_velodyne(const PointCloud & cloud);
void write_velodyne(const PointCloud & cloud, const std::filesystem::path & path);

/// Reads P2, R0_rect and Tr_velo_to_cam. The calibration file carries no image
/// size, so it is supplied by the caller. Rotation blocks are re-orthonormalized
/// when they deviate from a rotation by less than 1e-3 (printed precision).
Calibration read_calibration(
  const std::filesystem::path & path, int image_width, int image_height);
Calibration parse_calibration(std::string_view text, int image_width, int image_height);
std::string format_calibration(const Calibration & c);

/// One KITTI label record in the rectified camera frame.
struct CameraLabel
{
  std::string type;
  double truncated{0.0};
  int occluded{0};
  double alpha{0.0};
  double bbox[4]{0.0, 0.0, 0.0, 0.0};
  double h{0.0};
  double w{0.0};
  double l{0.0};
  /// Bottom center of the box.
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double rotation_y{0.0};
};

/// Parses label text. Throws FormatError naming "line <n>" on malformed records.
std::vector<CameraLabel> parse_camera_labels(std::string_view text);

/// Maps a KITTI type to a studied class; Van counts as Car, everything else is dropped.
std::optional<ClassId> map_kitti_class(std::string_view type);

GroundTruthObject camera_label_to_lidar(const CameraLabel & label, ClassId cls, const Calibration & c);
CameraLabel lidar_object_to_camera(const GroundTruthObject & obj, const Calibration & c);

std::vector<GroundTruthObject> parse_labels(std::string_view text, const Calibration & c);
std::vector<GroundTruthObject> read_labels(const std::filesystem::path & path, const Calibration & c);
std::string format_labels(std::span<const CameraLabel> labels);

/// Assigns layer ids by binning elevation atan2(z, hypot(x, y)) uniformly over
/// [min, max] into `num_layers` bins. Throws DegenerateGeometryError when every
/// point sits at the sensor origin.
PointCloud estimate_layers(PointCloud cloud, int num_layers);

/// nuScenes category -> studied class (car, pedestrian, bicycle with rider).
std::optional<ClassId> map_nuscenes_class(
  std::string_view name, std::span<const std::string> attributes);

}  // namespace bevrpn

#endif  // BEVRPN__KITTI_HPP_
