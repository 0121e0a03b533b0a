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

#ifndef BEVRPN__EVALUATOR_HPP_
#define BEVRPN__EVALUATOR_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevrpn/decoder.hpp"
#include "bevrpn/kitti.hpp"

namespace bevrpn
{

inline constexpr double kDefaultIouThreshold = 0.5;

/// Intersection over union of two axis-aligned boxes with positive area.
double iou_aabb(const Aabb & a, const Aabb & b);

/// Tight axis-aligned hull of the rotated l x w footprint.
Aabb ground_truth_hull(const GroundTruthObject & obj);

/// Greedy matching in descending score order (input order on ties). Each
/// detection takes the unmatched same-class ground truth of highest IoU
/// (lowest index on ties) when that IoU reaches the threshold.
/// Returns one TP flag per detection, in input order.
std::vector<bool> match_detections(
  std::span<const Proposal> dets, std::span<const GroundTruthObject> gts, double iou_thresh = kDefaultIouThreshold);

struct ScoredMatch
{
  double score{0.0};
  bool tp{false};
};

struct PrPoint
{
  double recall{0.0};
  double precision{0.0};
};

struct ApCurve
{
  /// Empty when there are neither detections nor ground truths.
  std::optional<double> ap;
  std::vector<PrPoint> points;
};

/// All-point interpolated AP over matches pooled from any number of scenes.
/// The sort is stable, so pooling order decides score ties.
ApCurve ap_from_matches(std::vector<ScoredMatch> matches, int num_gt);

/// Single-scene AP for one class.
std::optional<double> average_precision(
  std::span<const Proposal> dets, std::span<const GroundTruthObject> gts, int class_id,
  double iou_thresh = kDefaultIouThreshold);

struct ClassCounts
{
  int num_gt{0};
  int num_det{0};
  int num_tp{0};
  int num_fp{0};
};

struct EvalResult
{
  std::map<int, std::optional<double>> per_class_ap;
  std::optional<double> mean_ap;
  std::map<int, std::vector<PrPoint>> pr_points;
  std::map<int, ClassCounts> counts;
  double iou_threshold{kDefaultIouThreshold};
};

struct SceneResult
{
  std::vector<Proposal> dets;
  std::vector<GroundTruthObject> gts;
};

/// Matches every scene separately, then pools matches per class before AP.
EvalResult evaluate(std::span<const SceneResult> scenes, int n_classes = kNumClasses,
                    double iou_thresh = kDefaultIouThreshold);

/// JSON document (pretty-printed) including the interpolation/hull conventions.
std::string eval_result_json(const EvalResult & r);

struct CurveRow
{
  int layer_count{0};
  std::map<int, std::optional<double>> ap;
  std::optional<double> mean_ap;
};

struct CurveTable
{
  std::vector<CurveRow> rows;
  std::vector<std::string> notes;
  bool partial{false};
};

/// One evaluation per layer count; `detections[k]` holds per-scene proposals
/// aligned with `ground_truth`. Missing layer counts are noted and skipped.
CurveTable ap_vs_layers(
  std::span<const std::vector<GroundTruthObject>> ground_truth,
  const std::map<int, std::vector<std::vector<Proposal>>> & detections, std::span<const int> layer_counts,
  int num_layers = 64, int n_classes = kNumClasses, double iou_thresh = kDefaultIouThreshold);

/// `layer_count,class,ap` rows; class is the class name or "mean".
std::string curve_csv(const CurveTable & table, int n_classes = kNumClasses);

}  // namespace bevrpn

#endif  // BEVRPN__EVALUATOR_HPP_
