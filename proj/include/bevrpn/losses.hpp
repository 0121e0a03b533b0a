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

#ifndef BEVRPN__LOSSES_HPP_
#define BEVRPN__LOSSES_HPP_

#include "bevrpn/maps.hpp"
#include "bevrpn/targets.hpp"

namespace bevrpn
{

// Framework-free reference losses with analytic gradients. They take
// probabilities (not logits); squashing belongs to the network.

inline constexpr double kProbabilityEpsilon = 1e-7;

struct LossConstants
{
  double alpha{2.0};
  double beta{4.0};
  double gamma_cls{1.0};
  double gamma_reg{1.0};
};

struct LossAndGrad
{
  double value{0.0};
  ScoreMap grad;
};

struct LossBreakdown
{
  double total{0.0};
  double cls{0.0};
  double reg{0.0};
  double gamma_cls{1.0};
  double gamma_reg{1.0};
  int num_pos{0};
};

/// Copy of `pred` clamped to [eps, 1 - eps].
ScoreMap clamp_probabilities(const ScoreMap & pred, double eps = kProbabilityEpsilon);

/// Penalty-reduced pixel focal loss, normalized by max(num_pos, 1).
/// Cells with gt == 1 are positives. Throws ContractViolation on shape
/// mismatch or predictions outside (0, 1).
LossAndGrad focal_loss(const ScoreMap & pred, const ScoreMap & gt, double alpha, double beta, int num_pos);

struct SmoothL1
{
  double value;
  double derivative;
};

SmoothL1 smooth_l1(double x);

/// Smooth L1 on (target - pred) for dx, dy, side over positive cells, / max(num_pos, 1).
LossAndGrad reg_loss(const ScoreMap & pred_reg, const TargetMaps & targets);

LossBreakdown total_loss(
  const ScoreMap & pred_cls, const ScoreMap & pred_reg, const TargetMaps & targets,
  const LossConstants & k = {});

}  // namespace bevrpn

#endif  // BEVRPN__LOSSES_HPP_
