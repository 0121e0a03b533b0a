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

#include "bevrpn/evaluator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bevrpn/augment.hpp"
#include "bevrpn/errors.hpp"

namespace bevrpn
{

double iou_aabb(const Aabb & a, const Aabb & b)
{
  if (!(a.x_hi > a.x_lo && a.y_hi > a.y_lo && b.x_hi > b.x_lo && b.y_hi > b.y_lo)) {
    throw ContractViolation("iou_aabb: boxes must have positive area");
  }
  const double iw = std::min(a.x_hi, b.x_hi) - std::max(a.x_lo, b.x_lo);
  const double ih = std::min(a.y_hi, b.y_hi) - std::max(a.y_lo, b.y_lo);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  return std::clamp(inter / (a.area() + b.area() - inter), 0.0, 1.0);
}

Aabb ground_truth_hull(const GroundTruthObject & obj)
{
  const double c = std::abs(std::cos(obj.theta));
  const double s = std::abs(std::sin(obj.theta));
  const double ex = 0.5 * (obj.l * c + obj.w * s);
  const double ey = 0.5 * (obj.l * s + obj.w * c);
  return {obj.x - ex, obj.y - ey, obj.x + ex, obj.y + ey};
}

namespace
{

std::vector<std::size_t> score_order(std::span<const Proposal> dets)
{
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

}  // namespace

std::vector<bool> match_detections(
  std::span<const Proposal> dets, std::span<const GroundTruthObject> gts, double iou_thresh)
{
  std::vector<Aabb> hulls;
  hulls.reserve(gts.size());
  for (const auto & g : gts) {
    hulls.push_back(ground_truth_hull(g));
  }
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> tp(dets.size(), false);
  for (auto d : score_order(dets)) {
    const Aabb box = dets[d].aabb();
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || static_cast<int>(gts[g].class_id) != dets[d].class_id) {
        continue;
      }
      const double iou = iou_aabb(box, hulls[g]);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best >= iou_thresh) {
      taken[best_gt] = true;
      tp[d] = true;
    }
  }
  return tp;
}

ApCurve ap_from_matches(std::vector<ScoredMatch> matches, int num_gt)
{
  ApCurve out;
  if (num_gt <= 0) {
    if (!matches.empty()) {
      out.ap = 0.0;
    }
    return out;
  }
  std::stable_sort(matches.begin(), matches.end(), [](const ScoredMatch & a, const ScoredMatch & b) {
    return a.score > b.score;
  });
  int tp = 0;
  int fp = 0;
  for (const auto & m : matches) {
    (m.tp ? tp : fp) += 1;
    out.points.push_back(PrPoint{static_cast<double>(tp) / num_gt, static_cast<double>(tp) / (tp + fp)});
  }
  // Precision envelope: best precision at any recall at or beyond this point.
  std::vector<double> envelope(out.points.size());
  double running = 0.0;
  for (std::size_t i = out.points.size(); i-- > 0;) {
    running = std::max(running, out.points[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    ap += (out.points[i].recall - prev_recall) * envelope[i];
    prev_recall = out.points[i].recall;
  }
  out.ap = ap;
  return out;
}

std::optional<double> average_precision(
  std::span<const Proposal> dets, std::span<const GroundTruthObject> gts, int class_id, double iou_thresh)
{
  const SceneResult scene{std::vector<Proposal>(dets.begin(), dets.end()),
                          std::vector<GroundTruthObject>(gts.begin(), gts.end())};
  const auto r = evaluate(std::span<const SceneResult>(&scene, 1), std::max(class_id + 1, kNumClasses), iou_thresh);
  return r.per_class_ap.at(class_id);
}

EvalResult evaluate(std::span<const SceneResult> scenes, int n_classes, double iou_thresh)
{
  EvalResult r;
  r.iou_threshold = iou_thresh;
  std::vector<std::vector<ScoredMatch>> pooled(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    r.counts[c] = ClassCounts{};
  }
  for (const auto & scene : scenes) {
    const auto flags = match_detections(scene.dets, scene.gts, iou_thresh);
    for (const auto d : score_order(scene.dets)) {
      const int c = scene.dets[d].class_id;
      if (c < 0 || c >= n_classes) {
        throw ContractViolation("evaluate: detection class outside [0, n_classes)");
      }
      pooled[c].push_back(ScoredMatch{scene.dets[d].score, static_cast<bool>(flags[d])});
      auto & k = r.counts[c];
      ++k.num_det;
      (flags[d] ? k.num_tp : k.num_fp) += 1;
    }
    for (const auto & g : scene.gts) {
      const int c = static_cast<int>(g.class_id);
      if (c >= 0 && c < n_classes) {
        ++r.counts[c].num_gt;
      }
    }
  }
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < n_classes; ++c) {
    auto curve = ap_from_matches(std::move(pooled[c]), r.counts[c].num_gt);
    r.per_class_ap[c] = curve.ap;
    r.pr_points[c] = std::move(curve.points);
    if (curve.ap) {
      sum += *curve.ap;
      ++defined;
    }
  }
  if (defined > 0) {
    r.mean_ap = sum / defined;
  }
  return r;
}

namespace
{

std::string class_label(int c)
{
  if (auto id = class_from_index(c)) {
    return std::string(class_name(*id));
  }
  return "class_" + std::to_string(c);
}

nlohmann::json optional_json(const std::optional<double> & v)
{
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string eval_result_json(const EvalResult & r)
{
  nlohmann::json j;
  j["iou_threshold"] = r.iou_threshold;
  j["interpolation"] = "all-point";
  j["ground_truth_geometry"] = "axis-aligned hull of the oriented footprint";
  j["mean_ap"] = optional_json(r.mean_ap);
  nlohmann::json classes = nlohmann::json::object();
  for (const auto & [c, ap] : r.per_class_ap) {
    nlohmann::json entry;
    entry["ap"] = optional_json(ap);
    const auto & k = r.counts.at(c);
    entry["num_gt"] = k.num_gt;
    entry["num_det"] = k.num_det;
    entry["num_tp"] = k.num_tp;
    entry["num_fp"] = k.num_fp;
    nlohmann::json pr = nlohmann::json::array();
    for (const auto & p : r.pr_points.at(c)) {
      pr.push_back({p.recall, p.precision});
    }
    entry["pr"] = std::move(pr);
    classes[class_label(c)] = std::move(entry);
  }
  j["classes"] = std::move(classes);
  return j.dump(2) + "\n";
}

CurveTable ap_vs_layers(
  std::span<const std::vector<GroundTruthObject>> ground_truth,
  const std::map<int, std::vector<std::vector<Proposal>>> & detections, std::span<const int> layer_counts,
  int num_layers, int n_classes, double iou_thresh)
{
  CurveTable table;
  for (int k : layer_counts) {
    const auto sel = stride_layers(num_layers, k);
    if (!sel.exact) {
      table.notes.push_back(
        std::to_string(k) + " layers does not divide " + std::to_string(num_layers) + "; stride " +
        std::to_string(sel.stride) + " keeps " + std::to_string(sel.layers.size()) + " layers");
    }
    auto it = detections.find(k);
    if (it == detections.end()) {
      table.partial = true;
      table.notes.push_back("missing detections for " + std::to_string(k) + " layers");
      continue;
    }
    if (it->second.size() != ground_truth.size()) {
      throw ContractViolation("ap_vs_layers: detections for " + std::to_string(k) +
                              " layers do not align with the ground truth scenes");
    }
    std::vector<SceneResult> scenes;
    scenes.reserve(ground_truth.size());
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
      scenes.push_back(SceneResult{it->second[i], ground_truth[i]});
    }
    const auto r = evaluate(scenes, n_classes, iou_thresh);
    table.rows.push_back(CurveRow{k, r.per_class_ap, r.mean_ap});
  }
  return table;
}

std::string curve_csv(const CurveTable & table, int n_classes)
{
  std::ostringstream out;
  out.precision(9);
  out << "layer_count,class,ap\n";
  auto field = [](const std::optional<double> & v) {
    if (!v) {
      return std::string();
    }
    std::ostringstream s;
    s.precision(9);
    s << *v;
    return s.str();
  };
  for (const auto & row : table.rows) {
    for (int c = 0; c < n_classes; ++c) {
      auto it = row.ap.find(c);
      out << row.layer_count << ',' << class_label(c) << ','
          << field(it == row.ap.end() ? std::nullopt : it->second) << '\n';
    }
    out << row.layer_count << ",mean," << field(row.mean_ap) << '\n';
  }
  return out.str();
}

}  // namespace bevrpn
