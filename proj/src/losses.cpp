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

#include "bevrpn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "bevrpn/errors.hpp"

namespace bevrpn
{

ScoreMap clamp_probabilities(const ScoreMap & pred, double eps)
{
  ScoreMap out = pred;
  for (auto & p : out.data()) {
    p = std::clamp(p, eps, 1.0 - eps);
  }
  return out;
}

LossAndGrad focal_loss(const ScoreMap & pred, const ScoreMap & gt, double alpha, double beta, int num_pos)
{
  if (!pred.same_shape(gt)) {
    throw ContractViolation("focal_loss: prediction and target shapes differ");
  }
  const double norm = static_cast<double>(std::max(num_pos, 1));
  LossAndGrad out;
  out.grad = ScoreMap(pred.channels(), pred.height(), pred.width(), 0.0);

  // Extended precision keeps the sum accurate for finite-difference checks.
  long double acc = 0.0L;
  const auto & q = pred.data();
  const auto & p = gt.data();
  auto & g = out.grad.data();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q[i];
    if (!(qi > 0.0 && qi < 1.0)) {
      throw ContractViolation("focal_loss: predictions must lie strictly inside (0, 1)");
    }
    if (p[i] == 1.0) {
      const double one_m = 1.0 - qi;
      const double nll = -std::log(qi);
      acc += std::pow(one_m, alpha) * nll;
      g[i] = -alpha * std::pow(one_m, alpha - 1.0) * nll - std::pow(one_m, alpha) / qi;
    } else {
      const double weight = std::pow(1.0 - p[i], beta);
      const double nll = -std::log1p(-qi);
      acc += weight * std::pow(qi, alpha) * nll;
      g[i] = weight * (alpha * std::pow(qi, alpha - 1.0) * nll + std::pow(qi, alpha) / (1.0 - qi));
    }
    g[i] /= norm;
  }
  out.value = static_cast<double>(acc / norm);
  return out;
}

SmoothL1 smooth_l1(double x)
{
  if (std::abs(x) < 1.0) {
    return {0.5 * x * x, x};
  }
  return {std::abs(x) - 0.5, x > 0.0 ? 1.0 : -1.0};
}

LossAndGrad reg_loss(const ScoreMap & pred_reg, const TargetMaps & targets)
{
  if (!pred_reg.same_shape(targets.reg) || pred_reg.channels() != 3) {
    throw ContractViolation("reg_loss: prediction and target shapes differ");
  }
  const double norm = static_cast<double>(std::max(targets.num_pos, 1));
  LossAndGrad out;
  out.grad = ScoreMap(3, pred_reg.height(), pred_reg.width(), 0.0);
  long double acc = 0.0L;
  for (int v = 0; v < pred_reg.height(); ++v) {
    for (int u = 0; u < pred_reg.width(); ++u) {
      if (!targets.reg_positive(v, u)) {
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        const auto s = smooth_l1(targets.reg(c, v, u) - pred_reg(c, v, u));
        acc += s.value;
        out.grad(c, v, u) = -s.derivative / norm;
      }
    }
  }
  out.value = static_cast<double>(acc / norm);
  return out;
}

LossBreakdown total_loss(
  const ScoreMap & pred_cls, const ScoreMap & pred_reg, const TargetMaps & targets, const LossConstants & k)
{
  LossBreakdown b;
  b.cls = focal_loss(pred_cls, targets.cls, k.alpha, k.beta, targets.num_pos).value;
  b.reg = reg_loss(pred_reg, targets).value;
  b.gamma_cls = k.gamma_cls;
  b.gamma_reg = k.gamma_reg;
  b.num_pos = targets.num_pos;
  b.total = k.gamma_cls * b.cls + k.gamma_reg * b.reg;
  return b;
}

}  // namespace bevrpn
