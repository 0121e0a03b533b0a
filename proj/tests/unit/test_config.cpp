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

#include <gtest/gtest.h>

#include <cstdlib>

#include "bevrpn/config.hpp"
#include "bevrpn/errors.hpp"

using namespace bevrpn;
using nlohmann::json;

namespace
{

struct SeedEnv
{
  explicit SeedEnv(const char * v) { v ? setenv("AGNO_SEED", v, 1) : unsetenv("AGNO_SEED"); }
  ~SeedEnv() { unsetenv("AGNO_SEED"); }
};

}  // namespace

TEST(Config, EmptyObjectGivesDefaults)
{
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.input_grid.n_x(), 800);
  EXPECT_EQ(c.input_grid.n_y(), 800);
  EXPECT_EQ(c.output_grid.n_x(), 200);
  EXPECT_EQ(c.loss.alpha, 2.0);
  EXPECT_EQ(c.loss.beta, 4.0);
  EXPECT_EQ(c.loss.gamma_cls, 1.0);
  EXPECT_EQ(c.loss.gamma_reg, 1.0);
  EXPECT_EQ(c.top_k, 20);
  EXPECT_EQ(c.eval_iou, 0.5);
  EXPECT_EQ(c.augment.patch_width, 256);
  EXPECT_EQ(c.augment.patch_height, 256);
  EXPECT_FALSE(c.augment_enabled);
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_EQ(c.workers, 1);
}

TEST(Config, ReadsNestedKeys)
{
  const auto c = config_from_json(json::parse(R"({
    "grid": {"s_x_out": 0.5, "s_y_out": 0.5},
    "loss": {"gamma_cls": 2.0},
    "decode": {"top_k": 50, "neighborhood": 5},
    "augment": {"enabled": true, "layer_keep_min": 0.25, "brightness": [0.9, 1.1]},
    "seed": 17,
    "workers": 4
  })"));
  EXPECT_EQ(c.output_grid.n_x(), 100);
  EXPECT_EQ(c.loss.gamma_cls, 2.0);
  EXPECT_EQ(c.top_k, 50);
  EXPECT_EQ(c.neighborhood, 5);
  EXPECT_TRUE(c.augment_enabled);
  EXPECT_EQ(c.augment.layer_keep_min, 0.25);
  EXPECT_EQ(c.augment.jitter_ranges.brightness_hi, 1.1);
  EXPECT_EQ(*c.seed, 17u);
  EXPECT_EQ(c.workers, 4);
}

TEST(Config, RejectsUnknownAndInvalid)
{
  EXPECT_THROW(config_from_json(json::parse(R"({"grdi": {}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"loss": {"alpha": 2, "delta": 1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"loss": {"alpha": "two"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"decode": {"neighborhood": 4}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"augment": {"layer_keep_min": 0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"augment": {"brightness": [1.2, 0.8]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"workers": 0})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"loss": 3})")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/bevrpn.json"), IoError);
}

TEST(Config, EchoRoundTripsWithoutWorkers)
{
  auto c = config_from_json(json::parse(R"({"workers": 8, "lidar": {"num_layers": 32}})"));
  const auto j = config_to_json(c, 99);
  EXPECT_FALSE(j.contains("workers"));
  EXPECT_EQ(j["seed"], 99);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back, 99), j);
  EXPECT_EQ(back.num_layers, 32);
  EXPECT_EQ(*back.seed, 99u);
}

TEST(Seed, Precedence)
{
  PipelineConfig with_seed;
  with_seed.seed = 5;
  const PipelineConfig without;
  {
    SeedEnv env("11");
    EXPECT_EQ(resolve_seed(3u, with_seed), 3u);
    EXPECT_EQ(resolve_seed(std::nullopt, with_seed), 5u);
    EXPECT_EQ(resolve_seed(std::nullopt, without), 11u);
  }
  {
    SeedEnv env(nullptr);
    EXPECT_EQ(resolve_seed(std::nullopt, without), 0u);
  }
  {
    SeedEnv env("12abc");
    EXPECT_THROW(resolve_seed(std::nullopt, without), ConfigError);
  }
}
