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

#ifndef BEVRPN__PIPELINE_HPP_
#define BEVRPN__PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bevrpn/config.hpp"
#include "bevrpn/evaluator.hpp"
#include "bevrpn/exchange.hpp"

namespace bevrpn
{

/// Runs fn(0) .. fn(count - 1) on up to `workers` threads. Exceptions from fn
/// are not caught here; callers record per-item failures themselves.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)> & fn);

// --- preprocess --------------------------------------------------------------

struct PreprocessOptions
{
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  std::string split{"training"};
  PipelineConfig config{};
  std::uint64_t seed{0};
};

struct SampleReport
{
  std::string sample_id;
  bool ok{false};
  std::string error;
  std::size_t num_voxels{0};
  int num_labels{0};
  int skipped_labels{0};
};

struct PreprocessSummary
{
  std::vector<SampleReport> samples;
  int failures{0};
  double mean_voxels{0.0};
  int skipped_labels{0};

  std::string to_text() const;
};

/// Sample ids (file stems of <split>/velodyne/*.bin), sorted.
std::vector<std::string> list_samples(const std::filesystem::path & dataset_dir, const std::string & split);

/// KITTI layout in, one manifest plus tensor directory per sample out:
///   <out>/<id>.json and <out>/<id>/<role>.agno
PreprocessSummary run_preprocess(const PreprocessOptions & options);

// --- subsample ----------------------------------------------------------------

/// Layers: random layers (training-style). Stride: the deterministic
/// evaluation selection keeping every (num_layers / k)-th layer. Uniform: points.
enum class SubsampleMode { Layers, Stride, Uniform };

/// Reads a velodyne scan, reduces it and writes it back in the same format.
/// Returns the number of points written.
std::size_t run_subsample(
  const std::filesystem::path & in, const std::filesystem::path & out, SubsampleMode mode, double fraction,
  std::uint64_t seed, int num_layers = 64);

// --- decode -------------------------------------------------------------------

/// Decodes the "cls_pred" / "reg_pred" tensors referenced by a prediction manifest.
/// A sample manifest without predictions decodes its "cls_target" / "reg_target".
std::vector<Proposal> decode_prediction_manifest(
  const std::filesystem::path & manifest_path, int top_k, int neighborhood = kDefaultNeighborhood,
  double side_floor = kDefaultSideFloor);

/// Writes a prediction manifest for `cls` / `reg` maps (f32 tensors beside it).
void write_prediction_manifest(
  const std::filesystem::path & manifest_path, const std::string & sample_id, const ScoreMap & cls,
  const ScoreMap & reg, const GridSpec & input_grid, const GridSpec & output_grid);

// --- eval / curve -----------------------------------------------------------

struct LabelSource
{
  std::filesystem::path labels_dir;
  std::filesystem::path calib_dir;
  int image_width{1242};
  int image_height{375};
};

/// Ground truth for one sample in the LiDAR frame.
std::vector<GroundTruthObject> load_ground_truth(const LabelSource & src, const std::string & sample_id);

struct EvalRun
{
  EvalResult result;
  std::vector<std::string> sample_ids;
  /// Ids present on only one side.
  std::vector<std::string> unmatched;
};

EvalRun run_eval(const std::filesystem::path & proposals_dir, const LabelSource & labels, double iou_thresh);

/// Precision-recall SVG, one line per class.
std::string pr_curve_svg(const EvalResult & r);

struct CurveRun
{
  CurveTable table;
  std::vector<std::string> missing;
};

/// Expects <proposals_by_layer_dir>/<k>/<id>.txt for every layer count k.
CurveRun run_curve(
  const LabelSource & labels, const std::filesystem::path & proposals_by_layer_dir, std::span<const int> layer_counts,
  int num_layers, double iou_thresh);

/// AP-vs-layer-count SVG with one line per class plus the mean.
std::string curve_svg(const CurveTable & table, int n_classes = kNumClasses);

// --- inspect ------------------------------------------------------------------

std::string inspect_manifest(const std::filesystem::path & manifest_path);

}  // namespace bevrpn

#endif  // BEVRPN__PIPELINE_HPP_
