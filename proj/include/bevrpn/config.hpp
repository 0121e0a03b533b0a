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

#ifndef BEVRPN__CONFIG_HPP_
#define BEVRPN__CONFIG_HPP_

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>

#include "bevrpn/augment.hpp"
#include "bevrpn/decoder.hpp"
#include "bevrpn/evaluator.hpp"
#include "bevrpn/geometry.hpp"
#include "bevrpn/losses.hpp"

namespace bevrpn
{

/// Effective pipeline settings. Every field has a default, so an empty JSON
/// object yields the reference configuration.
struct PipelineConfig
{
  GridSpec input_grid{GridSpec::default_input()};
  GridSpec output_grid{GridSpec::default_output()};

  bool augment_enabled{false};
  AugmentOptions augment{};

  LossConstants loss{};

  int top_k{kDefaultTopK};
  int neighborhood{kDefaultNeighborhood};
  double side_floor{kDefaultSideFloor};

  double eval_iou{kDefaultIouThreshold};
  double min_overlap{0.5};

  int num_layers{64};
  bool keep_off_image{false};

  /// Image size used when a sample has no image file.
  int default_image_width{1242};
  int default_image_height{375};

  /// Seed from the config file, if it set one.
  std::optional<std::uint64_t> seed;
  /// Worker threads; deliberately excluded from the echoed config.
  int workers{1};
};

/// Parses the documented keys; unknown keys raise ConfigError.
PipelineConfig config_from_json(const nlohmann::json & j);
PipelineConfig load_config(const std::filesystem::path & path);

/// Effective configuration as JSON, with `seed` resolved and without `workers`.
nlohmann::json config_to_json(const PipelineConfig & c, std::uint64_t seed);

/// Command-line flag, then config file, then the AGNO_SEED environment variable, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const PipelineConfig & c);

}  // namespace bevrpn

#endif  // BEVRPN__CONFIG_HPP_
