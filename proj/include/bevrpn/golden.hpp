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

#ifndef BEVRPN__GOLDEN_HPP_
#define BEVRPN__GOLDEN_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bevrpn/geometry.hpp"
#include "bevrpn/kitti.hpp"
#include "bevrpn/losses.hpp"
#include "bevrpn/maps.hpp"

namespace bevrpn
{

// Reference loss fixtures for a training stack to reproduce. Each fixture is
// a random label set on a small output grid, random predictions and the
// loss values and gradients computed here.

struct LossFixture
{
  std::vector<GroundTruthObject> labels;
  ScoreMap pred_cls;
  ScoreMap pred_reg;
  TargetMaps targets;
  LossBreakdown loss;
  ScoreMap grad_cls;
  ScoreMap grad_reg;
};

/// 16 x 16 cells at 0.25 m: x in [0, 4), y in [-2, 2).
GridSpec golden_grid();

/// Deterministic in (seed, index).
LossFixture make_loss_fixture(std::uint64_t seed, std::size_t index, const GridSpec & g = golden_grid());

/// Writes <out>/fixture_<i>.json plus <out>/fixture_<i>/<role>.agno for i < count.
/// Returns the manifest paths.
std::vector<std::filesystem::path> write_loss_fixtures(
  const std::filesystem::path & out_dir, std::size_t count, std::uint64_t seed);

}  // namespace bevrpn

#endif  // BEVRPN__GOLDEN_HPP_
