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

#include "bevrpn/golden.hpp"

#include <cstdio>

#include <json.hpp>

#include "bevrpn/augment.hpp"
#include "bevrpn/exchange.hpp"

namespace bevrpn
{

namespace fs = std::filesystem;

GridSpec golden_grid() { return GridSpec(0.0, 4.0, -2.0, 2.0, 0.25, 0.25); }

LossFixture make_loss_fixture(std::uint64_t seed, std::size_t index, const GridSpec & g)
{
  RngStream rng(seed, index);
  LossFixture f;
  const int n_labels = rng.uniform_int(1, 4);
  for (int i = 0; i < n_labels; ++i) {
    GroundTruthObject o;
    o.class_id = static_cast<ClassId>(rng.uniform_int(0, kNumClasses - 1));
    o.x = rng.uniform(g.x_min() + 0.1, g.x_max() - 0.1);
    o.y = rng.uniform(g.y_min() + 0.1, g.y_max() - 0.1);
    o.w = rng.uniform(0.4, 1.8);
    o.l = rng.uniform(0.6, 2.5);
    o.h = rng.uniform(1.0, 2.0);
    o.theta = rng.uniform(-3.14159, 3.14159);
    f.labels.push_back(o);
  }
  f.targets = encode_targets(f.labels, g);

  f.pred_cls = ScoreMap(kNumClasses, g.n_y(), g.n_x());
  for (auto & p : f.pred_cls.data()) {
    p = rng.uniform(0.02, 0.98);
  }
  f.pred_reg = ScoreMap(3, g.n_y(), g.n_x());
  for (int v = 0; v < g.n_y(); ++v) {
    for (int u = 0; u < g.n_x(); ++u) {
      f.pred_reg(0, v, u) = rng.uniform(-1.5, 1.5);
      f.pred_reg(1, v, u) = rng.uniform(-1.5, 1.5);
      f.pred_reg(2, v, u) = rng.uniform(0.0, 4.0);
    }
  }

  const LossConstants k;
  f.loss = total_loss(f.pred_cls, f.pred_reg, f.targets, k);
  auto cls = focal_loss(f.pred_cls, f.targets.cls, k.alpha, k.beta, f.targets.num_pos);
  auto reg = reg_loss(f.pred_reg, f.targets);
  for (auto & x : cls.grad.data()) {
    x *= k.gamma_cls;
  }
  for (auto & x : reg.grad.data()) {
    x *= k.gamma_reg;
  }
  f.grad_cls = std::move(cls.grad);
  f.grad_reg = std::move(reg.grad);
  return f;
}

namespace
{

TensorRecord f64_map(const std::string & name, const ScoreMap & m)
{
  return make_tensor<double>(
    name,
    {static_cast<std::uint64_t>(m.channels()), static_cast<std::uint64_t>(m.height()),
     static_cast<std::uint64_t>(m.width())},
    m.data());
}

}  // namespace

std::vector<fs::path> write_loss_fixtures(const fs::path & out_dir, std::size_t count, std::uint64_t seed)
{
  fs::create_directories(out_dir);
  const auto g = golden_grid();
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "fixture_%04zu", i);
    const auto f = make_loss_fixture(seed, i, g);
    const fs::path rel(stem);
    fs::create_directories(out_dir / rel);

    SampleManifest m;
    m.sample_id = stem;
    m.input_grid = g;
    m.output_grid = g;
    auto put = [&](const std::string & role, const TensorRecord & t) {
      write_tensor(t, out_dir / rel / (role + ".agno"));
      m.tensors[role] = (rel / (role + ".agno")).generic_string();
    };
    put("pred_cls", f64_map("pred_cls", f.pred_cls));
    put("pred_reg", f64_map("pred_reg", f.pred_reg));
    put("cls_target", f64_map("cls_target", f.targets.cls));
    put("reg_target", f64_map("reg_target", f.targets.reg));
    put("pos_mask", make_tensor<std::uint8_t>(
                      "pos_mask",
                      {static_cast<std::uint64_t>(f.targets.pos_mask.channels()),
                       static_cast<std::uint64_t>(f.targets.pos_mask.height()),
                       static_cast<std::uint64_t>(f.targets.pos_mask.width())},
                      f.targets.pos_mask.data()));
    put("grad_cls", f64_map("grad_cls", f.grad_cls));
    put("grad_reg", f64_map("grad_reg", f.grad_reg));

    nlohmann::json labels = nlohmann::json::array();
    for (const auto & o : f.labels) {
      labels.push_back({{"class", static_cast<int>(o.class_id)}, {"x", o.x}, {"y", o.y}, {"z", o.z}, {"h", o.h},
                        {"w", o.w}, {"l", o.l}, {"theta", o.theta}});
    }
    m.provenance = {{"generator", "loss fixture"}, {"seed", seed}, {"index", i}, {"labels", labels}};
    m.counts = {{"num_pos", f.targets.num_pos}};
    m.config = {
      {"loss", {{"alpha", 2.0}, {"beta", 4.0}, {"gamma_cls", f.loss.gamma_cls}, {"gamma_reg", f.loss.gamma_reg}}},
      {"probability_epsilon", kProbabilityEpsilon},
      {"values", {{"total", f.loss.total}, {"cls", f.loss.cls}, {"reg", f.loss.reg}}}};
    const auto path = out_dir / (std::string(stem) + ".json");
    write_manifest(m, path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace bevrpn
