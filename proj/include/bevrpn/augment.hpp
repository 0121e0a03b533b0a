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

#ifndef BEVRPN__AUGMENT_HPP_
#define BEVRPN__AUGMENT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/image.hpp"
#include "bevrpn/kitti.hpp"

namespace bevrpn
{

/// Deterministic random stream keyed by (seed, sample index).
///
/// Built on mt19937_64, whose output sequence is fixed by the standard, with
/// hand-written conversions so draws do not depend on the library's
/// distribution implementations.
class RngStream
{
public:
  RngStream(std::uint64_t seed, std::uint64_t sample_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t sample_index() const { return sample_index_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  /// k distinct values from [0, n), ascending.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  /// Index drawn with probability proportional to weights[i].
  std::size_t discrete(std::span<const double> weights);

private:
  std::uint64_t seed_;
  std::uint64_t sample_index_;
  std::mt19937_64 engine_;
};

// --- resolution degradation -------------------------------------------------

struct LayerDrop
{
  PointCloud cloud;
  std::vector<int> kept_layers;
};

/// Keeps round(keep_fraction * num_layers) randomly chosen layers (at least one).
LayerDrop drop_layers(const PointCloud & cloud, double keep_fraction, RngStream & rng);

/// Keeps exactly the points whose layer id is listed, preserving order.
PointCloud keep_layers(const PointCloud & cloud, std::span<const int> layers);

struct StrideSelection
{
  std::vector<int> layers;
  int stride{1};
  /// False when `kept` did not divide `num_layers` and the nearest stride was used.
  bool exact{true};
};

/// Deterministic evaluation-time selection: layers with index = 0 mod stride.
StrideSelection stride_layers(int num_layers, int kept);

/// Keeps a uniformly random subset of exactly round(keep_fraction * N) points.
PointCloud uniform_subsample(const PointCloud & cloud, double keep_fraction, RngStream & rng);

// --- label-focused cropping -------------------------------------------------

struct CropRect
{
  int x0{0};
  int y0{0};
  int width{256};
  int height{256};

  bool contains(const Pixel & p) const
  {
    return p.px >= x0 && p.px < x0 + width && p.py >= y0 && p.py < y0 + height;
  }
  bool operator==(const CropRect &) const = default;
};

struct CropChoice
{
  CropRect rect;
  /// Index of the label the crop was built around; empty for a random crop.
  std::optional<std::size_t> label;
};

/// Selection weight of a label: inverse of its 3D volume (unnormalized).
double crop_weight(const GroundTruthObject & obj);

/// Picks a patch around a label chosen with inverse-volume probability and
/// shifted by up to a quarter patch, or a uniformly random patch when no label
/// projects into the image.
CropChoice select_crop(
  std::span<const GroundTruthObject> labels, const Calibration & c, int image_width,
  int image_height, int patch_width, int patch_height, RngStream & rng);

/// Calibration whose image is `rect` of the original one.
Calibration crop_calibration(const Calibration & c, const CropRect & rect);

struct CropResult
{
  Image image;
  PointCloud cloud;
  Calibration calib;
  std::vector<std::size_t> kept_indices;
};

/// Crops the image and drops every point that does not project into the patch.
/// `image` may be empty (no camera image available).
CropResult apply_crop(const Image & image, const PointCloud & cloud, const Calibration & c, const CropRect & rect);

/// Labels whose center projects into the image of `c`.
std::vector<GroundTruthObject> labels_in_view(std::span<const GroundTruthObject> labels, const Calibration & c);

// --- flip and photometric jitter -------------------------------------------

struct Scene
{
  Image image;
  PointCloud cloud;
  Calibration calib;
  std::vector<GroundTruthObject> labels;
};

/// Mirrors the scene about the image's vertical axis and the LiDAR x-z plane.
/// The camera model is conjugated so that flipped points project onto the
/// mirrored pixel (width - 1 - px) of the original projection.
Scene flip_horizontal(const Scene & scene);

/// Applies flip_horizontal with probability `p`. Returns whether it was applied.
bool horizontal_flip(Scene & scene, RngStream & rng, double p = 0.5);

struct JitterFactors
{
  double brightness{1.0};
  double contrast{1.0};
  double saturation{1.0};
};

struct JitterRanges
{
  double brightness_lo{0.8}, brightness_hi{1.2};
  double contrast_lo{0.8}, contrast_hi{1.2};
  double saturation_lo{0.8}, saturation_hi{1.2};
};

/// Brightness, then contrast, then saturation; values clamped to [0, 255].
Image apply_jitter(const Image & image, const JitterFactors & f);

/// Draws factors from `ranges` and applies them.
Image color_jitter(const Image & image, RngStream & rng, const JitterRanges & ranges = {}, JitterFactors * drawn = nullptr);

// --- training-time composition ---------------------------------------------

struct AugmentOptions
{
  bool drop_layers{true};
  double layer_keep_min{0.2};
  double layer_keep_max{0.4};
  bool crop{true};
  int patch_width{256};
  int patch_height{256};
  double flip_probability{0.5};
  bool jitter{true};
  JitterRanges jitter_ranges{};
};

struct AugmentRecord
{
  std::uint64_t seed{0};
  std::uint64_t sample_index{0};
  std::vector<std::string> ops;
  std::optional<double> layer_keep_fraction;
  std::vector<int> kept_layers;
  std::optional<CropRect> crop;
  std::optional<std::size_t> crop_label;
  bool flipped{false};
  std::optional<JitterFactors> jitter;
};

/// Layer drop, label-focused crop with frustum filtering, flip, then jitter.
Scene augment_scene(const Scene & scene, const AugmentOptions & options, RngStream & rng, AugmentRecord & record);

}  // namespace bevrpn

#endif  // BEVRPN__AUGMENT_HPP_
