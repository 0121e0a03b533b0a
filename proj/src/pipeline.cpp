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

#include "bevrpn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "bevrpn/augment.hpp"
#include "bevrpn/decoder.hpp"
#include "bevrpn/errors.hpp"
#include "bevrpn/image.hpp"
#include "bevrpn/kitti.hpp"
#include "bevrpn/plot.hpp"
#include "bevrpn/targets.hpp"
#include "bevrpn/voxelizer.hpp"

namespace bevrpn
{

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)> & fn)
{
  const auto n_threads = std::min<std::size_t>(std::max(workers, 1), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto & th : pool) {
    th.join();
  }
}

namespace
{

std::vector<std::string> stems_with_extension(const fs::path & dir, const std::string & ext)
{
  std::vector<std::string> ids;
  if (!fs::is_directory(dir)) {
    return ids;
  }
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

template <typename T>
TensorRecord map_tensor(const std::string & name, const Map3<T> & m)
{
  std::vector<float> values(m.data().begin(), m.data().end());
  return make_tensor<float>(
    name, {static_cast<std::uint64_t>(m.channels()), static_cast<std::uint64_t>(m.height()),
           static_cast<std::uint64_t>(m.width())},
    values);
}

json augmentation_json(const AugmentRecord & r, bool enabled)
{
  json j;
  j["enabled"] = enabled;
  j["seed"] = r.seed;
  j["sample_index"] = r.sample_index;
  j["ops"] = r.ops;
  if (r.layer_keep_fraction) {
    j["layer_keep_fraction"] = *r.layer_keep_fraction;
  }
  if (r.crop) {
    j["crop"] = {{"x0", r.crop->x0}, {"y0", r.crop->y0}, {"width", r.crop->width}, {"height", r.crop->height}};
    j["crop_label"] = r.crop_label ? json(*r.crop_label) : json(nullptr);
  }
  j["flipped"] = r.flipped;
  if (r.jitter) {
    j["jitter"] = {
      {"brightness", r.jitter->brightness}, {"contrast", r.jitter->contrast}, {"saturation", r.jitter->saturation}};
  }
  return j;
}

SampleReport preprocess_one(
  const PreprocessOptions & opt, const std::string & id, std::size_t sample_index)
{
  SampleReport rep;
  rep.sample_id = id;
  const auto & cfg = opt.config;
  const fs::path split_dir = opt.dataset_dir / opt.split;
  const fs::path rel_velo = fs::path(opt.split) / "velodyne" / (id + ".bin");
  const fs::path rel_calib = fs::path(opt.split) / "calib" / (id + ".txt");
  const fs::path rel_label = fs::path(opt.split) / "label_2" / (id + ".txt");
  const fs::path rel_image = fs::path(opt.split) / "image_2" / (id + ".png");

  Scene scene;
  const bool has_image = fs::exists(opt.dataset_dir / rel_image);
  if (has_image) {
    scene.image = read_png(opt.dataset_dir / rel_image);
  }
  const int width = has_image ? scene.image.width : cfg.default_image_width;
  const int height = has_image ? scene.image.height : cfg.default_image_height;
  scene.calib = read_calibration(opt.dataset_dir / rel_calib, width, height);
  scene.cloud = read_velodyne(opt.dataset_dir / rel_velo);
  const std::size_t points_in = scene.cloud.size();
  if (!scene.cloud.empty()) {
    scene.cloud = estimate_layers(std::move(scene.cloud), cfg.num_layers);
  }
  const bool has_labels = fs::exists(opt.dataset_dir / rel_label);
  if (has_labels) {
    scene.labels = read_labels(opt.dataset_dir / rel_label, scene.calib);
  }

  AugmentRecord record;
  RngStream rng(opt.seed, sample_index);
  if (cfg.augment_enabled) {
    AugmentOptions aug = cfg.augment;
    if (scene.cloud.empty()) {
      aug.drop_layers = false;
    }
    scene = augment_scene(scene, aug, rng, record);
  } else {
    record.seed = opt.seed;
    record.sample_index = sample_index;
  }

  const auto encoded = encode_sample(scene.cloud, cfg.input_grid, scene.calib, EncodeOptions{cfg.keep_off_image});
  const auto targets = encode_targets(scene.labels, cfg.output_grid, TargetOptions{kNumClasses, cfg.min_overlap});

  const fs::path tensor_dir = opt.out_dir / id;
  fs::create_directories(tensor_dir);
  SampleManifest m;
  m.sample_id = id;
  m.input_grid = cfg.input_grid;
  m.output_grid = cfg.output_grid;
  m.feature_layout = std::string(kFeatureLayout);

  auto put = [&](const std::string & role, const TensorRecord & t) {
    write_tensor(t, tensor_dir / (role + ".agno"));
    m.tensors[role] = (fs::path(id) / (role + ".agno")).generic_string();
  };

  const auto n = static_cast<std::uint64_t>(encoded.size());
  std::vector<float> feats;
  std::vector<std::int32_t> idx;
  std::vector<float> coords;
  std::vector<float> mains;
  feats.reserve(n * kFeatureDim);
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    feats.insert(feats.end(), encoded.features[i].begin(), encoded.features[i].end());
    idx.push_back(encoded.bev_indices[i].u);
    idx.push_back(encoded.bev_indices[i].v);
    coords.push_back(static_cast<float>(encoded.image_coords[i].px));
    coords.push_back(static_cast<float>(encoded.image_coords[i].py));
    mains.push_back(static_cast<float>(encoded.main_points[i].x));
    mains.push_back(static_cast<float>(encoded.main_points[i].y));
    mains.push_back(static_cast<float>(encoded.main_points[i].z));
  }
  put("features", make_tensor<float>("features", {n, static_cast<std::uint64_t>(kFeatureDim)}, feats));
  put("bev_indices", make_tensor<std::int32_t>("bev_indices", {n, 2}, idx));
  put("image_coords", make_tensor<float>("image_coords", {n, 2}, coords));
  put("main_points", make_tensor<float>("main_points", {n, 3}, mains));
  put("cls_target", map_tensor("cls_target", targets.cls));
  put("reg_target", map_tensor("reg_target", targets.reg));
  put("pos_mask", make_tensor<std::uint8_t>(
                    "pos_mask",
                    {static_cast<std::uint64_t>(targets.pos_mask.channels()),
                     static_cast<std::uint64_t>(targets.pos_mask.height()),
                     static_cast<std::uint64_t>(targets.pos_mask.width())},
                    targets.pos_mask.data()));
  std::vector<double> label_rows;
  for (const auto & obj : scene.labels) {
    label_rows.insert(label_rows.end(), {static_cast<double>(obj.class_id), obj.x, obj.y, obj.z, obj.h, obj.w, obj.l, obj.theta});
  }
  put("labels", make_tensor<double>("labels", {static_cast<std::uint64_t>(scene.labels.size()), 8}, label_rows));
  if (!scene.image.empty()) {
    put("image", make_tensor<std::uint8_t>(
                   "image",
                   {static_cast<std::uint64_t>(scene.image.height), static_cast<std::uint64_t>(scene.image.width), 3},
                   scene.image.rgb));
  }

  m.augmentation = augmentation_json(record, cfg.augment_enabled);
  json sources;
  sources["velodyne"] = rel_velo.generic_string();
  sources["calib"] = rel_calib.generic_string();
  sources["label"] = has_labels ? json(rel_label.generic_string()) : json(nullptr);
  sources["image"] = has_image ? json(rel_image.generic_string()) : json(nullptr);
  m.provenance["sources"] = sources;
  m.provenance["layer_keep_list"] = record.kept_layers;
  m.provenance["layer_estimation"] = "uniform elevation bins";
  m.counts = {
    {"points_in", points_in},
    {"points_encoded", scene.cloud.size()},
    {"voxels", encoded.size()},
    {"labels", scene.labels.size()},
    {"num_pos", targets.num_pos},
    {"skipped_labels", targets.skipped_out_of_bounds},
    {"collisions", targets.collisions},
    {"shared_cells", targets.shared_cells}};
  m.config = config_to_json(cfg, opt.seed);
  write_manifest(m, opt.out_dir / (id + ".json"));

  rep.ok = true;
  rep.num_voxels = encoded.size();
  rep.num_labels = static_cast<int>(scene.labels.size());
  rep.skipped_labels = targets.skipped_out_of_bounds;
  return rep;
}

}  // namespace

std::vector<std::string> list_samples(const fs::path & dataset_dir, const std::string & split)
{
  return stems_with_extension(dataset_dir / split / "velodyne", ".bin");
}

std::string PreprocessSummary::to_text() const
{
  std::ostringstream o;
  o << "samples: " << samples.size() << " (" << failures << " failed)\n";
  o << "voxels/sample (mean): " << mean_voxels << "\n";
  o << "skipped labels (outside output grid): " << skipped_labels << "\n";
  for (const auto & s : samples) {
    if (!s.ok) {
      o << "  FAILED " << s.sample_id << ": " << s.error << "\n";
    }
  }
  return o.str();
}

PreprocessSummary run_preprocess(const PreprocessOptions & options)
{
  const auto ids = list_samples(options.dataset_dir, options.split);
  if (ids.empty()) {
    throw IoError("no velodyne scans under " + (options.dataset_dir / options.split / "velodyne").string());
  }
  fs::create_directories(options.out_dir);

  PreprocessSummary summary;
  summary.samples.resize(ids.size());
  parallel_for(ids.size(), options.config.workers, [&](std::size_t i) {
    try {
      summary.samples[i] = preprocess_one(options, ids[i], i);
    } catch (const std::exception & e) {
      summary.samples[i].sample_id = ids[i];
      summary.samples[i].ok = false;
      summary.samples[i].error = e.what();
    }
  });

  std::size_t voxel_total = 0;
  int ok = 0;
  for (const auto & s : summary.samples) {
    if (s.ok) {
      ++ok;
      voxel_total += s.num_voxels;
      summary.skipped_labels += s.skipped_labels;
    } else {
      ++summary.failures;
    }
  }
  summary.mean_voxels = ok ? static_cast<double>(voxel_total) / ok : 0.0;
  return summary;
}

// ---------------------------------------------------------------------------

std::size_t run_subsample(
  const fs::path & in, const fs::path & out, SubsampleMode mode, double fraction, std::uint64_t seed, int num_layers)
{
  const PointCloud cloud = read_velodyne(in);
  RngStream rng(seed, 0);
  PointCloud reduced;
  if (mode != SubsampleMode::Uniform && cloud.empty()) {
    reduced = cloud;
  } else if (mode == SubsampleMode::Layers) {
    reduced = drop_layers(estimate_layers(cloud, num_layers), fraction, rng).cloud;
  } else if (mode == SubsampleMode::Stride) {
    const int k = std::clamp(static_cast<int>(std::llround(fraction * num_layers)), 1, num_layers);
    reduced = keep_layers(estimate_layers(cloud, num_layers), stride_layers(num_layers, k).layers);
  } else {
    reduced = uniform_subsample(cloud, fraction, rng);
  }
  write_file_atomic(out, encode_velodyne(reduced));
  return reduced.size();
}

// ---------------------------------------------------------------------------

namespace
{

ScoreMap map_from_tensor(const TensorRecord & t, const std::string & role)
{
  if (t.shape.size() != 3) {
    throw FormatError(role, role + " must have shape [C, H, W]");
  }
  ScoreMap m(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]), static_cast<int>(t.shape[2]));
  if (t.dtype == DType::F32) {
    const auto v = tensor_values<float>(t);
    std::copy(v.begin(), v.end(), m.data().begin());
  } else if (t.dtype == DType::F64) {
    m.data() = tensor_values<double>(t);
  } else {
    throw FormatError("dtype", role + " must be f32 or f64");
  }
  return m;
}

}  // namespace

std::vector<Proposal> decode_prediction_manifest(
  const fs::path & manifest_path, int top_k, int neighborhood, double side_floor)
{
  const auto m = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  const bool has_pred = m.tensors.count("cls_pred") || m.tensors.count("reg_pred");
  const std::string cls_role = has_pred ? "cls_pred" : "cls_target";
  const std::string reg_role = has_pred ? "reg_pred" : "reg_target";
  for (const auto & role : {cls_role, reg_role}) {
    if (!m.tensors.count(role)) {
      throw FormatError(role, "manifest has no '" + role + "' tensor");
    }
  }
  const auto cls = map_from_tensor(read_tensor(dir / m.tensors.at(cls_role)), cls_role);
  const auto reg = map_from_tensor(read_tensor(dir / m.tensors.at(reg_role)), reg_role);
  if (cls.height() != m.output_grid.n_y() || cls.width() != m.output_grid.n_x()) {
    throw FormatError(cls_role, cls_role + " does not match the output grid");
  }
  if (reg.channels() != 3 || !reg.same_shape(ScoreMap(3, cls.height(), cls.width()))) {
    throw FormatError(reg_role, reg_role + " must have shape [3, H, W] matching " + cls_role);
  }
  return decode(cls, reg, m.output_grid, neighborhood, top_k, side_floor);
}

void write_prediction_manifest(
  const fs::path & manifest_path, const std::string & sample_id, const ScoreMap & cls, const ScoreMap & reg,
  const GridSpec & input_grid, const GridSpec & output_grid)
{
  const auto dir = manifest_path.parent_path();
  const fs::path tensor_dir = fs::path(sample_id + "_pred");
  fs::create_directories(dir / tensor_dir);
  SampleManifest m;
  m.sample_id = sample_id;
  m.input_grid = input_grid;
  m.output_grid = output_grid;
  write_tensor(map_tensor("cls_pred", cls), dir / tensor_dir / "cls_pred.agno");
  write_tensor(map_tensor("reg_pred", reg), dir / tensor_dir / "reg_pred.agno");
  m.tensors["cls_pred"] = (tensor_dir / "cls_pred.agno").generic_string();
  m.tensors["reg_pred"] = (tensor_dir / "reg_pred.agno").generic_string();
  write_manifest(m, manifest_path);
}

// ---------------------------------------------------------------------------

std::vector<GroundTruthObject> load_ground_truth(const LabelSource & src, const std::string & sample_id)
{
  const auto calib = read_calibration(src.calib_dir / (sample_id + ".txt"), src.image_width, src.image_height);
  return read_labels(src.labels_dir / (sample_id + ".txt"), calib);
}

EvalRun run_eval(const fs::path & proposals_dir, const LabelSource & labels, double iou_thresh)
{
  const auto det_ids = stems_with_extension(proposals_dir, ".txt");
  const auto gt_ids = stems_with_extension(labels.labels_dir, ".txt");
  EvalRun run;
  std::set_intersection(det_ids.begin(), det_ids.end(), gt_ids.begin(), gt_ids.end(), std::back_inserter(run.sample_ids));
  std::set_symmetric_difference(
    det_ids.begin(), det_ids.end(), gt_ids.begin(), gt_ids.end(), std::back_inserter(run.unmatched));

  std::vector<SceneResult> scenes;
  scenes.reserve(run.sample_ids.size());
  for (const auto & id : run.sample_ids) {
    scenes.push_back(SceneResult{read_proposals(proposals_dir / (id + ".txt")), load_ground_truth(labels, id)});
  }
  run.result = evaluate(scenes, kNumClasses, iou_thresh);
  return run;
}

std::string pr_curve_svg(const EvalResult & r)
{
  std::vector<Series> series;
  for (const auto & [c, pts] : r.pr_points) {
    Series s;
    s.name = std::string(class_from_index(c) ? class_name(*class_from_index(c)) : "class");
    const auto & ap = r.per_class_ap.at(c);
    if (ap) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " (AP %.3f)", *ap);
      s.name += buf;
    }
    for (const auto & p : pts) {
      s.points.emplace_back(p.recall, p.precision);
    }
    series.push_back(std::move(s));
  }
  PlotSpec spec;
  char title[64];
  std::snprintf(title, sizeof(title), "Precision-recall (BEV IoU %.2f)", r.iou_threshold);
  spec.title = title;
  spec.x_label = "recall";
  spec.y_label = "precision";
  spec.x_range = {0.0, 1.0};
  spec.y_range = {0.0, 1.0};
  return svg_line_plot(spec, series);
}

CurveRun run_curve(
  const LabelSource & labels, const fs::path & proposals_by_layer_dir, std::span<const int> layer_counts,
  int num_layers, double iou_thresh)
{
  CurveRun run;
  const auto ids = stems_with_extension(labels.labels_dir, ".txt");
  std::vector<std::vector<GroundTruthObject>> gts;
  gts.reserve(ids.size());
  for (const auto & id : ids) {
    gts.push_back(load_ground_truth(labels, id));
  }
  std::map<int, std::vector<std::vector<Proposal>>> dets;
  for (int k : layer_counts) {
    const fs::path dir = proposals_by_layer_dir / std::to_string(k);
    if (!fs::is_directory(dir)) {
      run.missing.push_back(dir.string());
      continue;
    }
    auto & per_scene = dets[k];
    for (const auto & id : ids) {
      const auto path = dir / (id + ".txt");
      if (fs::exists(path)) {
        per_scene.push_back(read_proposals(path));
      } else {
        run.missing.push_back(path.string());
        per_scene.emplace_back();
      }
    }
  }
  run.table = ap_vs_layers(gts, dets, layer_counts, num_layers, kNumClasses, iou_thresh);
  if (!run.missing.empty()) {
    run.table.partial = true;
  }
  return run;
}

std::string curve_svg(const CurveTable & table, int n_classes)
{
  std::vector<Series> series;
  for (int c = 0; c < n_classes; ++c) {
    Series s;
    s.name = class_from_index(c) ? std::string(class_name(*class_from_index(c))) : "class " + std::to_string(c);
    for (const auto & row : table.rows) {
      auto it = row.ap.find(c);
      if (it != row.ap.end() && it->second) {
        s.points.emplace_back(row.layer_count, *it->second);
      }
    }
    series.push_back(std::move(s));
  }
  Series mean{"mean", {}};
  for (const auto & row : table.rows) {
    if (row.mean_ap) {
      mean.points.emplace_back(row.layer_count, *row.mean_ap);
    }
  }
  series.push_back(std::move(mean));
  for (auto & s : series) {
    std::sort(s.points.begin(), s.points.end());
  }
  PlotSpec spec;
  spec.title = table.partial ? "AP (IoU 0.5) vs number of layers [partial]" : "AP (IoU 0.5) vs number of layers";
  spec.x_label = "number of layers";
  spec.y_label = "average precision";
  spec.y_range = {0.0, 1.0};
  return svg_line_plot(spec, series);
}

std::string inspect_manifest(const fs::path & manifest_path)
{
  const auto m = read_manifest(manifest_path);
  std::ostringstream o;
  o << "sample: " << m.sample_id << "\n";
  o << "input grid: " << m.input_grid.n_x() << " x " << m.input_grid.n_y() << " @ " << m.input_grid.s_x() << " m\n";
  o << "output grid: " << m.output_grid.n_x() << " x " << m.output_grid.n_y() << " @ " << m.output_grid.s_x()
    << " m\n";
  if (!m.feature_layout.empty()) {
    o << "feature layout: " << m.feature_layout << "\n";
  }
  const auto dir = manifest_path.parent_path();
  for (const auto & [role, rel] : m.tensors) {
    o << "  " << role << ": ";
    try {
      const auto t = read_tensor(dir / rel);
      o << dtype_name(t.dtype) << " [";
      for (std::size_t i = 0; i < t.shape.size(); ++i) {
        o << (i ? ", " : "") << t.shape[i];
      }
      o << "]\n";
    } catch (const std::exception & e) {
      o << "ERROR " << e.what() << "\n";
    }
  }
  if (!m.counts.empty()) {
    o << "counts: " << m.counts.dump() << "\n";
  }
  if (m.augmentation.contains("ops")) {
    o << "augmentation: " << m.augmentation["ops"].dump() << "\n";
  }
  return o.str();
}

}  // namespace bevrpn
