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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bevrpn/config.hpp"
#include "bevrpn/decoder.hpp"
#include "bevrpn/errors.hpp"
#include "bevrpn/evaluator.hpp"
#include "bevrpn/exchange.hpp"
#include "bevrpn/golden.hpp"
#include "bevrpn/pipeline.hpp"
#include "bevrpn/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bevrpn;

namespace
{

PipelineConfig config_or_default(const std::string & path)
{
  return path.empty() ? PipelineConfig{} : load_config(path);
}

void write_text(const fs::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  write_file_atomic(path, text);
}

LabelSource label_source(const std::string & labels, const std::string & calib, const PipelineConfig & cfg)
{
  LabelSource src;
  src.labels_dir = labels;
  src.calib_dir = calib.empty() ? fs::path(labels).parent_path() / "calib" : fs::path(calib);
  src.image_width = cfg.default_image_width;
  src.image_height = cfg.default_image_height;
  return src;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"bevrpn: LiDAR/camera BEV proposal data pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "seed (overrides config and AGNO_SEED)");

  // preprocess
  auto * pre = app.add_subcommand("preprocess", "KITTI layout -> per-sample manifests and tensors");
  std::string dataset_dir, out_dir, split = "training";
  int workers = 0;
  bool augment = false, no_augment = false;
  pre->add_option("dataset_dir", dataset_dir)->required()->check(CLI::ExistingDirectory);
  pre->add_option("out_dir", out_dir)->required();
  pre->add_option("--split", split);
  pre->add_option("--workers", workers, "worker threads (default from config, else 1)");
  pre->add_flag("--augment", augment, "enable training augmentation");
  pre->add_flag("--no-augment", no_augment, "disable training augmentation");

  // subsample
  auto * sub = app.add_subcommand("subsample", "reduce a velodyne scan by layers or uniformly");
  std::string cloud_in, cloud_out, mode = "layers";
  double fraction = 1.0;
  int num_layers = 0;
  sub->add_option("cloud_in", cloud_in)->required()->check(CLI::ExistingFile);
  sub->add_option("cloud_out", cloud_out)->required();
  sub->add_option("--mode", mode)->check(CLI::IsMember({"layers", "stride", "uniform"}));
  sub->add_option("--fraction", fraction)->required()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--num-layers", num_layers, "scanner rings (default from config)");

  // decode
  auto * dec = app.add_subcommand("decode", "prediction manifest -> proposal text file");
  std::string pred_manifest, proposals_out;
  int top_k = 0;
  dec->add_option("pred_manifest", pred_manifest)->required()->check(CLI::ExistingFile);
  dec->add_option("out_file", proposals_out)->required();
  dec->add_option("--top-k", top_k);

  // eval
  auto * ev = app.add_subcommand("eval", "proposals vs labels -> AP JSON and PR plot");
  std::string proposals_dir, labels_dir, calib_dir, eval_json = "eval.json", eval_svg = "pr_curve.svg";
  double iou = 0.0;
  ev->add_option("proposals_dir", proposals_dir)->required()->check(CLI::ExistingDirectory);
  ev->add_option("labels_dir", labels_dir)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--calib", calib_dir, "calibration dir (default: sibling 'calib')");
  ev->add_option("--json", eval_json);
  ev->add_option("--svg", eval_svg);
  ev->add_option("--iou", iou);

  // curve
  auto * cur = app.add_subcommand("curve", "AP vs number of layers -> CSV and plot");
  std::string curve_dataset, by_layer_dir, curve_csv_path = "ap_vs_layers.csv", curve_svg_path = "ap_vs_layers.svg";
  std::vector<int> layer_counts;
  cur->add_option("dataset_dir", curve_dataset, "split dir holding label_2/ and calib/")
    ->required()
    ->check(CLI::ExistingDirectory);
  cur->add_option("proposals_by_layer_dir", by_layer_dir)->required()->check(CLI::ExistingDirectory);
  cur->add_option("layer_counts", layer_counts)->required();
  cur->add_option("--csv", curve_csv_path);
  cur->add_option("--svg", curve_svg_path);
  cur->add_option("--iou", iou);

  // inspect
  auto * ins = app.add_subcommand("inspect", "print a manifest summary");
  std::string inspect_path;
  ins->add_option("manifest", inspect_path)->required()->check(CLI::ExistingFile);

  // golden
  auto * gold = app.add_subcommand("golden", "write reference loss fixtures");
  std::string golden_dir;
  std::size_t golden_count = 20;
  gold->add_option("out_dir", golden_dir)->required();
  gold->add_option("--count", golden_count);

  // synth
  auto * syn = app.add_subcommand("synth", "write a small synthetic KITTI-layout dataset");
  std::string synth_dir;
  SyntheticOptions synth;
  bool synth_no_images = false;
  syn->add_option("out_dir", synth_dir)->required();
  syn->add_option("--samples", synth.num_samples);
  syn->add_option("--max-objects", synth.max_objects);
  syn->add_flag("--no-images", synth_no_images);

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = config_or_default(config_path);
    const std::uint64_t seed = resolve_seed(seed_flag, cfg);

    if (*pre) {
      if (augment && no_augment) {
        throw ConfigError("--augment and --no-augment are exclusive");
      }
      if (augment) {
        cfg.augment_enabled = true;
      }
      if (no_augment) {
        cfg.augment_enabled = false;
      }
      if (workers > 0) {
        cfg.workers = workers;
      }
      PreprocessOptions opt;
      opt.dataset_dir = dataset_dir;
      opt.out_dir = out_dir;
      opt.split = split;
      opt.config = cfg;
      opt.seed = seed;
      const auto summary = run_preprocess(opt);
      std::cout << summary.to_text();
      return summary.failures == 0 ? 0 : 1;
    }
    if (*sub) {
      const auto n = run_subsample(
        cloud_in, cloud_out, mode == "layers" ? SubsampleMode::Layers : mode == "stride" ? SubsampleMode::Stride : SubsampleMode::Uniform, fraction, seed,
        num_layers > 0 ? num_layers : cfg.num_layers);
      std::cout << "wrote " << n << " points to " << cloud_out << "\n";
      return 0;
    }
    if (*dec) {
      const auto props =
        decode_prediction_manifest(pred_manifest, top_k > 0 ? top_k : cfg.top_k, cfg.neighborhood, cfg.side_floor);
      write_text(proposals_out, format_proposals(props));
      std::cout << "wrote " << props.size() << " proposals to " << proposals_out << "\n";
      return 0;
    }
    if (*ev) {
      const auto src = label_source(labels_dir, calib_dir, cfg);
      const auto run = run_eval(proposals_dir, src, iou > 0 ? iou : cfg.eval_iou);
      write_text(eval_json, eval_result_json(run.result));
      write_text(eval_svg, pr_curve_svg(run.result));
      std::cout << "evaluated " << run.sample_ids.size() << " samples\n";
      for (const auto & [c, ap] : run.result.per_class_ap) {
        std::cout << "  " << class_name(static_cast<ClassId>(c)) << ": ";
        if (ap) {
          std::cout << *ap << "\n";
        } else {
          std::cout << "n/a\n";
        }
      }
      if (run.result.mean_ap) {
        std::cout << "  mean: " << *run.result.mean_ap << "\n";
      }
      for (const auto & id : run.unmatched) {
        std::cerr << "unmatched sample id: " << id << "\n";
      }
      return run.unmatched.empty() ? 0 : 1;
    }
    if (*cur) {
      const fs::path split_dir(curve_dataset);
      const auto src = label_source((split_dir / "label_2").string(), (split_dir / "calib").string(), cfg);
      const auto run = run_curve(src, by_layer_dir, layer_counts, cfg.num_layers, iou > 0 ? iou : cfg.eval_iou);
      write_text(curve_csv_path, curve_csv(run.table));
      write_text(curve_svg_path, curve_svg(run.table));
      for (const auto & note : run.table.notes) {
        std::cout << "note: " << note << "\n";
      }
      for (const auto & m : run.missing) {
        std::cerr << "missing: " << m << "\n";
      }
      if (run.table.partial) {
        std::cerr << "partial table written\n";
      }
      return run.missing.empty() ? 0 : 1;
    }
    if (*ins) {
      std::cout << inspect_manifest(inspect_path);
      const auto problems = validate_manifest(read_manifest(inspect_path), fs::path(inspect_path).parent_path());
      for (const auto & p : problems) {
        std::cerr << "problem: " << p << "\n";
      }
      return problems.empty() ? 0 : 1;
    }
    if (*gold) {
      const auto paths = write_loss_fixtures(golden_dir, golden_count, seed);
      std::cout << "wrote " << paths.size() << " fixtures to " << golden_dir << "\n";
      return 0;
    }
    if (*syn) {
      synth.seed = seed;
      synth.num_layers = cfg.num_layers;
      synth.write_images = !synth_no_images;
      write_synthetic_kitti(synth_dir, synth);
      std::cout << "wrote " << synth.num_samples << " samples to " << synth_dir << "\n";
      return 0;
    }
  } catch (const FormatError & e) {
    std::cerr << "format error (" << e.field() << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
