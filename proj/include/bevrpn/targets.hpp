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

#ifndef BEVRPN__TARGETS_HPP_
#define BEVRPN__TARGETS_HPP_

#include <span>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/kitti.hpp"
#include "bevrpn/maps.hpp"

namespace bevrpn
{

/// Per-class center heatmaps and the (dx, dy, side) regression targets.
///
/// A cell is positive for class c when a label of class c has its center in
/// that cell; its heatmap value is exactly 1 there. Regression channels are
/// zero wherever no class is positive.
struct TargetMaps
{
  ScoreMap cls;
  ScoreMap reg;
  MaskMap pos_mask;
  int num_pos{0};
  /// Labels whose center falls outside the output grid.
  int skipped_out_of_bounds{0};
  /// Same-class labels that shared a center cell with a larger one.
  int collisions{0};
  /// Cells positive for more than one class; the larger footprint owns `reg`.
  int shared_cells{0};

  /// True when any class is positive at (v, u).
  bool reg_positive(int v, int u) const;
};

struct TargetOptions
{
  int n_classes{kNumClasses};
  double min_overlap{0.5};
};

/// Largest integer diagonal shift r (in cells) for which a footprint of
/// l x w meters, shifted by (r, r), keeps IoU >= min_overlap with itself;
/// never below 1. The heatmap sigma is radius / 3 and the splat window is
/// truncated at 3 sigma.
int gaussian_radius(double w, double l, const GridSpec & g_out, double min_overlap);

TargetMaps encode_targets(
  std::span<const GroundTruthObject> labels, const GridSpec & g_out, const TargetOptions & options = {});

}  // namespace bevrpn

#endif  // BEVRPN__TARGETS_HPP_
