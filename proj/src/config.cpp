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

#include "bevrpn/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

namespace
{

using nlohmann::json;

void reject_unknown(const json & j, const std::string & section, std::initializer_list<const char *> known)
{
  if (!j.is_object()) {
    throw ConfigError("config section '" + section + "' must be an object");
  }
  const std::set<std::string> names(known.begin(), known.end());
  for (const auto & [key, _] : j.items()) {
    if (!names.count(key)) {
      throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json & j, const char * key, T & out)
{
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception & e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

void read_range(const json & j, const char * key, double & lo, double & hi)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw ConfigError(std::string("config key '") + key + "' must be [lo, hi]");
  }
  lo = r[0].get<double>();
  hi = r[1].get<double>();
  if (!(hi >= lo)) {
    throw ConfigError(std::string("config key '") + key + "' needs lo <= hi");
  }
}

}  // namespace

PipelineConfig config_from_json(const json & j)
{
  PipelineConfig c;
  reject_unknown(j, "", {"grid", "augment", "loss", "decode", "eval", "targets", "lidar", "image", "seed", "workers"});

  if (j.contains("grid")) {
    const auto & g = j["grid"];
    reject_unknown(g, "grid", {"x_min", "x_max", "y_min", "y_max", "s_x", "s_y", "s_x_out", "s_y_out", "z_min", "z_max"});
    double x_min = c.input_grid.x_min(), x_max = c.input_grid.x_max();
    double y_min = c.input_grid.y_min(), y_max = c.input_grid.y_max();
    double s_x = c.input_grid.s_x(), s_y = c.input_grid.s_y();
    double s_x_out = c.output_grid.s_x(), s_y_out = c.output_grid.s_y();
    read(g, "x_min", x_min);
    read(g, "x_max", x_max);
    read(g, "y_min", y_min);
    read(g, "y_max", y_max);
    read(g, "s_x", s_x);
    read(g, "s_y", s_y);
    read(g, "s_x_out", s_x_out);
    read(g, "s_y_out", s_y_out);
    c.input_grid = GridSpec(x_min, x_max, y_min, y_max, s_x, s_y);
    if (g.contains("z_min") || g.contains("z_max")) {
      double z_min = -1e9, z_max = 1e9;
      read(g, "z_min", z_min);
      read(g, "z_max", z_max);
      c.input_grid.set_z_range(z_min, z_max);
    }
    c.output_grid = c.input_grid.with_cell_size(s_x_out, s_y_out);
  }

  if (j.contains("augment")) {
    const auto & a = j["augment"];
    reject_unknown(a, "augment", {"enabled", "drop_layers", "layer_keep_min", "layer_keep_max", "crop", "patch_width",
                                  "patch_height", "flip_probability", "jitter", "brightness", "contrast", "saturation"});
    read(a, "enabled", c.augment_enabled);
    read(a, "drop_layers", c.augment.drop_layers);
    read(a, "layer_keep_min", c.augment.layer_keep_min);
    read(a, "layer_keep_max", c.augment.layer_keep_max);
    read(a, "crop", c.augment.crop);
    read(a, "patch_width", c.augment.patch_width);
    read(a, "patch_height", c.augment.patch_height);
    read(a, "flip_probability", c.augment.flip_probability);
    read(a, "jitter", c.augment.jitter);
    auto & r = c.augment.jitter_ranges;
    read_range(a, "brightness", r.brightness_lo, r.brightness_hi);
    read_range(a, "contrast", r.contrast_lo, r.contrast_hi);
    read_range(a, "saturation", r.saturation_lo, r.saturation_hi);
    if (!(c.augment.layer_keep_min > 0.0 && c.augment.layer_keep_min <= c.augment.layer_keep_max &&
          c.augment.layer_keep_max <= 1.0)) {
      throw ConfigError("augment layer keep range must satisfy 0 < min <= max <= 1");
    }
    if (c.augment.patch_width < 1 || c.augment.patch_height < 1) {
      throw ConfigError("augment patch size must be positive");
    }
  }

  if (j.contains("loss")) {
    const auto & l = j["loss"];
    reject_unknown(l, "loss", {"alpha", "beta", "gamma_cls", "gamma_reg"});
    read(l, "alpha", c.loss.alpha);
    read(l, "beta", c.loss.beta);
    read(l, "gamma_cls", c.loss.gamma_cls);
    read(l, "gamma_reg", c.loss.gamma_reg);
  }

  if (j.contains("decode")) {
    const auto & d = j["decode"];
    reject_unknown(d, "decode", {"top_k", "neighborhood", "side_floor"});
    read(d, "top_k", c.top_k);
    read(d, "neighborhood", c.neighborhood);
    read(d, "side_floor", c.side_floor);
    if (c.neighborhood < 1 || c.neighborhood % 2 == 0) {
      throw ConfigError("decode.neighborhood must be a positive odd integer");
    }
  }

  if (j.contains("eval")) {
    reject_unknown(j["eval"], "eval", {"iou"});
    read(j["eval"], "iou", c.eval_iou);
  }
  if (j.contains("targets")) {
    reject_unknown(j["targets"], "targets", {"min_overlap"});
    read(j["targets"], "min_overlap", c.min_overlap);
  }
  if (j.contains("lidar")) {
    reject_unknown(j["lidar"], "lidar", {"num_layers", "keep_off_image"});
    read(j["lidar"], "num_layers", c.num_layers);
    read(j["lidar"], "keep_off_image", c.keep_off_image);
    if (c.num_layers < 1) {
      throw ConfigError("lidar.num_layers must be >= 1");
    }
  }
  if (j.contains("image")) {
    reject_unknown(j["image"], "image", {"default_width", "default_height"});
    read(j["image"], "default_width", c.default_image_width);
    read(j["image"], "default_height", c.default_image_height);
  }
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    read(j, "seed", s);
    c.seed = s;
  }
  read(j, "workers", c.workers);
  if (c.workers < 1) {
    throw ConfigError("workers must be >= 1");
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error & e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

nlohmann::json config_to_json(const PipelineConfig & c, std::uint64_t seed)
{
  json j;
  j["grid"] = {
    {"x_min", c.input_grid.x_min()}, {"x_max", c.input_grid.x_max()}, {"y_min", c.input_grid.y_min()},
    {"y_max", c.input_grid.y_max()}, {"s_x", c.input_grid.s_x()},     {"s_y", c.input_grid.s_y()},
    {"s_x_out", c.output_grid.s_x()}, {"s_y_out", c.output_grid.s_y()}};
  if (std::isfinite(c.input_grid.z_min()) || std::isfinite(c.input_grid.z_max())) {
    j["grid"]["z_min"] = c.input_grid.z_min();
    j["grid"]["z_max"] = c.input_grid.z_max();
  }
  const auto & a = c.augment;
  const auto & r = a.jitter_ranges;
  j["augment"] = {
    {"enabled", c.augment_enabled},
    {"drop_layers", a.drop_layers},
    {"layer_keep_min", a.layer_keep_min},
    {"layer_keep_max", a.layer_keep_max},
    {"crop", a.crop},
    {"patch_width", a.patch_width},
    {"patch_height", a.patch_height},
    {"flip_probability", a.flip_probability},
    {"jitter", a.jitter},
    {"brightness", {r.brightness_lo, r.brightness_hi}},
    {"contrast", {r.contrast_lo, r.contrast_hi}},
    {"saturation", {r.saturation_lo, r.saturation_hi}}};
  j["loss"] = {
    {"alpha", c.loss.alpha}, {"beta", c.loss.beta}, {"gamma_cls", c.loss.gamma_cls}, {"gamma_reg", c.loss.gamma_reg}};
  j["decode"] = {{"top_k", c.top_k}, {"neighborhood", c.neighborhood}, {"side_floor", c.side_floor}};
  j["eval"] = {{"iou", c.eval_iou}};
  j["targets"] = {{"min_overlap", c.min_overlap}};
  j["lidar"] = {{"num_layers", c.num_layers}, {"keep_off_image", c.keep_off_image}};
  j["image"] = {{"default_width", c.default_image_width}, {"default_height", c.default_image_height}};
  j["seed"] = seed;
  return j;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const PipelineConfig & c)
{
  if (flag) {
    return *flag;
  }
  if (c.seed) {
    return *c.seed;
  }
  if (const char * env = std::getenv("AGNO_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) {
        return v;
      }
    } catch (const std::exception &) {
    }
    throw ConfigError(std::string("AGNO_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

}  // namespace bevrpn
