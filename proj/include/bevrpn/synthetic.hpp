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

#ifndef BEVRPN__SYNTHETIC_HPP_
#define BEVRPN__SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/image.hpp"
#include "bevrpn/kitti.hpp"

namespace bevrpn
{

// Small KITTI-shaped scenes: a ring scanner over a flat ground plane with a
// few boxes. Used by tests and for smoke runs without the real dataset.

struct SyntheticOptions
{
  int num_samples{5};
  int num_layers{64};
  int azimuth_steps{512};
  /// Horizontal field of view of the scan, centered on +x.
  double azimuth_fov_deg{120.0};
  int max_objects{6};
  bool write_images{true};
  std::uint64_t seed{0};
};

struct SyntheticScene
{
  Calibration calib;
  PointCloud cloud;
  std::vector<GroundTruthObject> objects;
  Image image;
};

/// Vehicle-style calibration: camera looking along +x with a slight tilt.
Calibration synthetic_calibration(std::uint64_t seed, std::size_t index);

SyntheticScene make_synthetic_scene(const SyntheticOptions & options, std::size_t index);

/// Writes <root>/training/{velodyne,calib,label_2[,image_2]} with ids 000000...
void write_synthetic_kitti(const std::filesystem::path & root, const SyntheticOptions & options);

}  // namespace bevrpn

#endif  // BEVRPN__SYNTHETIC_HPP_
