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

#include "bevrpn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t sample_index)
: seed_(seed),
  sample_index_(sample_index),
  engine_(splitmix64(seed ^ splitmix64(sample_index ^ 0x5851F42D4C957F2Dull)))
{
}

double RngStream::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n)
{
  if (n == 0) {
    throw ContractViolation("uniform_index: empty range");
  }
  // Rejection keeps the draw unbiased for any n.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % n;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi)
{
  if (hi < lo) {
    throw ContractViolation("uniform_int: hi < lo");
  }
  return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k)
{
  if (k > n) {
    throw ContractViolation("sample_without_replacement: k > n");
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t RngStream::discrete(std::span<const double> weights)
{
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractViolation("discrete: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw ContractViolation("discrete: weights sum to zero");
  }
  const double target = uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) {
      return i;
    }
  }
  // Rounding in the running sum; return the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) {
      return i;
    }
  }
  return weights.size() - 1;
}

// ---------------------------------------------------------------------------

namespace
{

void check_fraction(double f, const char * what)
{
  if (!(f > 0.0 && f <= 1.0)) {
    throw ContractViolation(std::string(what) + ": keep_fraction must lie in (0, 1]");
  }
}

}  // namespace

PointCloud keep_layers(const PointCloud & cloud, std::span<const int> layers)
{
  if (!cloud.layer_id) {
    throw ContractViolation("keep_layers: cloud has no layer ids");
  }
  cloud.check();
  std::vector<char> keep(static_cast<std::size_t>(cloud.num_layers), 0);
  for (int l : layers) {
    if (l < 0 || l >= cloud.num_layers) {
      throw ContractViolation("keep_layers: layer " + std::to_string(l) + " out of range");
    }
    keep[l] = 1;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (keep[(*cloud.layer_id)[i]]) {
      idx.push_back(i);
    }
  }
  return cloud.select(idx);
}

LayerDrop drop_layers(const PointCloud & cloud, double keep_fraction, RngStream & rng)
{
  check_fraction(keep_fraction, "drop_layers");
  if (!cloud.layer_id || cloud.num_layers < 1) {
    throw ContractViolation("drop_layers: cloud has no layer ids");
  }
  const auto n = static_cast<std::size_t>(cloud.num_layers);
  const auto k = std::clamp<std::size_t>(
    static_cast<std::size_t>(std::llround(keep_fraction * cloud.num_layers)), 1, n);
  LayerDrop out;
  for (auto l : rng.sample_without_replacement(n, k)) {
    out.kept_layers.push_back(static_cast<int>(l));
  }
  out.cloud = keep_layers(cloud, out.kept_layers);
  return out;
}

StrideSelection stride_layers(int num_layers, int kept)
{
  if (num_layers < 1 || kept < 1 || kept > num_layers) {
    throw ContractViolation("stride_layers: need 1 <= kept <= num_layers");
  }
  StrideSelection sel;
  sel.exact = num_layers % kept == 0;
  sel.stride = sel.exact ? num_layers / kept
                         : std::max(1, static_cast<int>(std::lround(static_cast<double>(num_layers) / kept)));
  for (int l = 0; l < num_layers; l += sel.stride) {
    sel.layers.push_back(l);
  }
  return sel;
}

PointCloud uniform_subsample(const PointCloud & cloud, double keep_fraction, RngStream & rng)
{
  check_fraction(keep_fraction, "uniform_subsample");
  const auto k = static_cast<std::size_t>(std::llround(keep_fraction * static_cast<double>(cloud.size())));
  const auto idx = rng.sample_without_replacement(cloud.size(), std::min(k, cloud.size()));
  return cloud.select(idx);
}

// ---------------------------------------------------------------------------

double crop_weight(const GroundTruthObject & obj) { return 1.0 / (obj.h * obj.w * obj.l); }

CropChoice select_crop(
  std::span<const GroundTruthObject> labels, const Calibration & c, int image_width,
  int image_height, int patch_width, int patch_height, RngStream & rng)
{
  if (patch_width < 1 || patch_height < 1 || image_width < patch_width || image_height < patch_height) {
    throw ContractViolation("select_crop: patch does not fit in the image");
  }
  const int max_x0 = image_width - patch_width;
  const int max_y0 = image_height - patch_height;

  Calibration view = c;
  view.image_width = image_width;
  view.image_height = image_height;
  const Projector project(view);

  std::vector<std::size_t> candidates;
  std::vector<Pixel> centers;
  std::vector<double> weights;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto pix = project(Point3{labels[i].x, labels[i].y, labels[i].z})) {
      candidates.push_back(i);
      centers.push_back(*pix);
      weights.push_back(crop_weight(labels[i]));
    }
  }

  CropChoice choice;
  choice.rect.width = patch_width;
  choice.rect.height = patch_height;
  if (candidates.empty()) {
    choice.rect.x0 = static_cast<int>(rng.uniform_int(0, max_x0));
    choice.rect.y0 = static_cast<int>(rng.uniform_int(0, max_y0));
    return choice;
  }

  const std::size_t pick = rng.discrete(weights);
  const Pixel center = centers[pick];
  const double dx = rng.uniform(-patch_width / 4.0, patch_width / 4.0);
  const double dy = rng.uniform(-patch_height / 4.0, patch_height / 4.0);

  auto place = [](double center_px, double shift, int patch, int max_origin) {
    auto origin = static_cast<int>(std::lround(center_px - patch / 2.0 + shift));
    // Integer origins with origin <= center < origin + patch.
    const auto cell = static_cast<int>(std::floor(center_px));
    origin = std::clamp(origin, cell - patch + 1, cell);
    return std::clamp(origin, 0, max_origin);
  };
  choice.rect.x0 = place(center.px, dx, patch_width, max_x0);
  choice.rect.y0 = place(center.py, dy, patch_height, max_y0);
  choice.label = candidates[pick];
  return choice;
}

Calibration crop_calibration(const Calibration & c, const CropRect & rect)
{
  Eigen::Matrix3d shift = Eigen::Matrix3d::Identity();
  shift(0, 2) = -rect.x0;
  shift(1, 2) = -rect.y0;
  Calibration out = c;
  out.projection = shift * c.projection;
  out.image_width = rect.width;
  out.image_height = rect.height;
  return out;
}

CropResult apply_crop(const Image & image, const PointCloud & cloud, const Calibration & c, const CropRect & rect)
{
  if (rect.x0 < 0 || rect.y0 < 0 || rect.width < 1 || rect.height < 1 ||
      rect.x0 + rect.width > c.image_width || rect.y0 + rect.height > c.image_height) {
    throw ContractViolation("apply_crop: rect does not lie inside the image");
  }
  if (!image.empty() && (image.width != c.image_width || image.height != c.image_height)) {
    throw ContractViolation("apply_crop: image size differs from calibration image size");
  }
  CropResult out;
  out.calib = crop_calibration(c, rect);
  // Filtering with the cropped camera makes "kept" and "reprojects into the
  // patch" the same predicate.
  const Projector project(out.calib);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (project(cloud.points[i])) {
      out.kept_indices.push_back(i);
    }
  }
  out.cloud = cloud.select(out.kept_indices);
  if (!image.empty()) {
    out.image = Image(rect.width, rect.height);
    for (int y = 0; y < rect.height; ++y) {
      const auto * src = &image.rgb[(static_cast<std::size_t>(rect.y0 + y) * image.width + rect.x0) * 3];
      std::copy(src, src + static_cast<std::size_t>(rect.width) * 3,
                &out.image.rgb[static_cast<std::size_t>(y) * rect.width * 3]);
    }
  }
  return out;
}

std::vector<GroundTruthObject> labels_in_view(std::span<const GroundTruthObject> labels, const Calibration & c)
{
  const Projector project(c);
  std::vector<GroundTruthObject> out;
  for (const auto & obj : labels) {
    if (project(Point3{obj.x, obj.y, obj.z})) {
      out.push_back(obj);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Scene flip_horizontal(const Scene & scene)
{
  Scene out = scene;
  const int w = scene.calib.image_width;
  if (!scene.image.empty()) {
    for (int y = 0; y < scene.image.height; ++y) {
      for (int x = 0; x < scene.image.width; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          out.image.at(x, y, ch) = scene.image.at(scene.image.width - 1 - x, y, ch);
        }
      }
    }
  }
  for (auto & p : out.cloud.points) {
    p.y = -p.y;
  }
  for (auto & obj : out.labels) {
    obj.y = -obj.y;
    obj.theta = wrap_angle(-obj.theta);
  }

  // Mirror in LiDAR (y -> -y) and camera (x -> -x); the conjugated extrinsics
  // stay a proper rotation, and the projection absorbs the pixel mirror
  // px -> w - 1 - px. Maps cx to w - 1 - cx.
  const Eigen::Matrix4d lidar_mirror = Eigen::Vector4d(1.0, -1.0, 1.0, 1.0).asDiagonal();
  const Eigen::Matrix4d cam_mirror = Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  Eigen::Matrix3d pixel_mirror = Eigen::Matrix3d::Identity();
  pixel_mirror(0, 0) = -1.0;
  pixel_mirror(0, 2) = w - 1.0;
  out.calib.velo_to_cam = cam_mirror * scene.calib.velo_to_cam * lidar_mirror;
  out.calib.rectification = cam_mirror * scene.calib.rectification * cam_mirror;
  out.calib.projection = pixel_mirror * scene.calib.projection * cam_mirror;
  return out;
}

bool horizontal_flip(Scene & scene, RngStream & rng, double p)
{
  if (!rng.bernoulli(p)) {
    return false;
  }
  scene = flip_horizontal(scene);
  return true;
}

Image apply_jitter(const Image & image, const JitterFactors & f)
{
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  std::vector<double> px(image.rgb.begin(), image.rgb.end());
  auto clamp255 = [](double v) { return std::clamp(v, 0.0, 255.0); };
  auto gray = [&](std::size_t i) { return 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2]; };

  for (auto & v : px) {
    v = clamp255(v * f.brightness);
  }
  if (n > 0) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += gray(i);
    }
    mean /= static_cast<double>(n);
    for (auto & v : px) {
      v = clamp255(mean + f.contrast * (v - mean));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gray(i);
    for (int ch = 0; ch < 3; ++ch) {
      auto & v = px[3 * i + ch];
      v = clamp255(g + f.saturation * (v - g));
    }
  }

  Image out(image.width, image.height);
  std::transform(px.begin(), px.end(), out.rgb.begin(),
                 [](double v) { return static_cast<std::uint8_t>(std::lround(v)); });
  return out;
}

Image color_jitter(const Image & image, RngStream & rng, const JitterRanges & ranges, JitterFactors * drawn)
{
  JitterFactors f;
  f.brightness = rng.uniform(ranges.brightness_lo, ranges.brightness_hi);
  f.contrast = rng.uniform(ranges.contrast_lo, ranges.contrast_hi);
  f.saturation = rng.uniform(ranges.saturation_lo, ranges.saturation_hi);
  if (drawn) {
    *drawn = f;
  }
  return apply_jitter(image, f);
}

// ---------------------------------------------------------------------------

Scene augment_scene(const Scene & scene, const AugmentOptions & options, RngStream & rng, AugmentRecord & record)
{
  record = AugmentRecord{};
  record.seed = rng.seed();
  record.sample_index = rng.sample_index();
  Scene out = scene;

  if (options.drop_layers) {
    const double fraction = rng.uniform(options.layer_keep_min, options.layer_keep_max);
    auto dropped = drop_layers(out.cloud, fraction, rng);
    out.cloud = std::move(dropped.cloud);
    record.layer_keep_fraction = fraction;
    record.kept_layers = std::move(dropped.kept_layers);
    record.ops.emplace_back("drop_layers");
  }

  if (options.crop) {
    if (out.calib.image_width < options.patch_width || out.calib.image_height < options.patch_height) {
      record.ops.emplace_back("crop_skipped");
    } else {
      const auto choice = select_crop(
        out.labels, out.calib, out.calib.image_width, out.calib.image_height, options.patch_width,
        options.patch_height, rng);
      auto cropped = apply_crop(out.image, out.cloud, out.calib, choice.rect);
      out.image = std::move(cropped.image);
      out.cloud = std::move(cropped.cloud);
      out.calib = cropped.calib;
      out.labels = labels_in_view(out.labels, out.calib);
      record.crop = choice.rect;
      record.crop_label = choice.label;
      record.ops.emplace_back("crop");
    }
  }

  if (options.flip_probability > 0.0) {
    record.flipped = horizontal_flip(out, rng, options.flip_probability);
    if (record.flipped) {
      record.ops.emplace_back("flip");
    }
  }

  if (options.jitter && !out.image.empty()) {
    JitterFactors f;
    out.image = color_jitter(out.image, rng, options.jitter_ranges, &f);
    record.jitter = f;
    record.ops.emplace_back("color_jitter");
  }
  return out;
}

}  // namespace bevrpn
