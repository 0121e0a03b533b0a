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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle
{

std::optional<std::pair<int, int>> scan_cell(const Point3 & p, const GridSpec & g)
{
  if (p.z < g.z_min() || p.z > g.z_max()) {
    return std::nullopt;
  }
  std::optional<int> cu;
  std::optional<int> cv;
  for (int u = 0; u < g.n_x() && !cu; ++u) {
    const double lo = g.x_min() + u * g.s_x();
    const double hi = std::min(g.x_max(), g.x_min() + (u + 1) * g.s_x());
    if (p.x >= lo && p.x < hi) {
      cu = u;
    }
  }
  for (int v = 0; v < g.n_y() && !cv; ++v) {
    const double lo = g.y_min() + v * g.s_y();
    const double hi = std::min(g.y_max(), g.y_min() + (v + 1) * g.s_y());
    if (p.y >= lo && p.y < hi) {
      cv = v;
    }
  }
  if (!cu || !cv) {
    return std::nullopt;
  }
  return std::make_pair(*cu, *cv);
}

std::map<std::pair<int, int>, std::vector<std::size_t>> brute_force_voxels(
  std::span<const Point3> points, const GridSpec & g)
{
  std::map<std::pair<int, int>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (auto c = scan_cell(points[i], g)) {
      out[*c].push_back(i);
    }
  }
  return out;
}

Ndt two_pass_ndt(std::span<const Point3> points)
{
  Ndt r{};
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sz = 0;
  for (const auto & p : points) {
    sx += p.x;
    sy += p.y;
    sz += p.z;
  }
  r.mean = {sx / n, sy / n, sz / n};
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (const auto & p : points) {
    const double dx = p.x - r.mean[0];
    const double dy = p.y - r.mean[1];
    const double dz = p.z - r.mean[2];
    xx += dx * dx;
    xy += dx * dy;
    xz += dx * dz;
    yy += dy * dy;
    yz += dy * dz;
    zz += dz * dz;
  }
  r.cov = {xx / n, xy / n, xz / n, yy / n, yz / n, zz / n};
  r.extremes = {points[0].x, points[0].y, points[0].z, points[0].x, points[0].y, points[0].z};
  for (const auto & p : points) {
    r.extremes[0] = std::min(r.extremes[0], p.x);
    r.extremes[1] = std::min(r.extremes[1], p.y);
    r.extremes[2] = std::min(r.extremes[2], p.z);
    r.extremes[3] = std::max(r.extremes[3], p.x);
    r.extremes[4] = std::max(r.extremes[4], p.y);
    r.extremes[5] = std::max(r.extremes[5], p.z);
  }
  return r;
}

std::size_t exhaustive_main_point(std::span<const Point3> points, double tie_tolerance)
{
  long double sx = 0, sy = 0, sz = 0;
  for (const auto & p : points) {
    sx += p.x;
    sy += p.y;
    sz += p.z;
  }
  const long double n = points.size();
  const long double mx = sx / n, my = sy / n, mz = sz / n;
  std::vector<long double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const long double dx = points[i].x - mx;
    const long double dy = points[i].y - my;
    const long double dz = points[i].z - mz;
    d2[i] = dx * dx + dy * dy + dz * dz;
  }
  const long double best = *std::min_element(d2.begin(), d2.end());
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (d2[i] <= best * (1 + tie_tolerance)) {
      return i;
    }
  }
  return 0;
}

double rect_iou(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1, double by1)
{
  const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = iw * ih;
  const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
  return inter / uni;
}

int shift_search_radius(double w, double l, double s_x, double s_y, double t)
{
  // Footprint in cells: length along x, width along y.
  const double a = l / s_x;
  const double b = w / s_y;
  int best = 0;
  for (int r = 0; r < 10000; ++r) {
    if (rect_iou(0, 0, a, b, r, r, a + r, b + r) >= t) {
      best = r;
    }
  }
  return std::max(best, 1);
}

std::vector<Peak> window_max_peaks(const bevrpn::ScoreMap & m, int neighborhood)
{
  const int h = neighborhood / 2;
  std::vector<Peak> out;
  for (int c = 0; c < m.channels(); ++c) {
    for (int v = 0; v < m.height(); ++v) {
      for (int u = 0; u < m.width(); ++u) {
        const double s = m(c, v, u);
        if (s <= 0) {
          continue;
        }
        bool peak = true;
        for (int vv = v - h; vv <= v + h && peak; ++vv) {
          for (int uu = u - h; uu <= u + h && peak; ++uu) {
            if (vv < 0 || uu < 0 || vv >= m.height() || uu >= m.width() || (vv == v && uu == u)) {
              continue;
            }
            const double o = m(c, vv, uu);
            const bool earlier = vv < v || (vv == v && uu < u);
            if (o > s || (o == s && earlier)) {
              peak = false;
            }
          }
        }
        if (peak) {
          out.push_back({c, u, v, s});
        }
      }
    }
  }
  return out;
}

std::vector<bool> greedy_replay(
  std::span<const bevrpn::Proposal> dets, std::span<const bevrpn::GroundTruthObject> gts, double thresh)
{
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  // Selection sort: highest score first, lower index first on ties.
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto & a = dets[order[i]];
      const auto & b = dets[order[j]];
      if (b.score > a.score || (b.score == a.score && order[j] < order[i])) {
        std::swap(order[i], order[j]);
      }
    }
  }
  std::vector<bool> used(gts.size(), false);
  std::vector<bool> tp(dets.size(), false);
  for (auto di : order) {
    const auto & d = dets[di];
    double best = -1;
    int best_g = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || static_cast<int>(gts[g].class_id) != d.class_id) {
        continue;
      }
      const auto hull = corner_hull(gts[g]);
      const double iou = rect_iou(
        d.cx - d.side / 2, d.cy - d.side / 2, d.cx + d.side / 2, d.cy + d.side / 2, hull[0], hull[1], hull[2], hull[3]);
      if (iou > best) {
        best = iou;
        best_g = static_cast<int>(g);
      }
    }
    if (best_g >= 0 && best >= thresh) {
      used[best_g] = true;
      tp[di] = true;
    }
  }
  return tp;
}

double ap_by_ranks(const std::vector<std::pair<double, bool>> & scored, int num_gt)
{
  if (num_gt == 0) {
    return 0.0;
  }
  auto s = scored;
  std::stable_sort(s.begin(), s.end(), [](const auto & a, const auto & b) { return a.first > b.first; });
  std::vector<double> prec(s.size());
  int tp = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    tp += s[i].second;
    prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  double ap = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].second) {
      continue;
    }
    double best = 0;
    for (std::size_t j = i; j < s.size(); ++j) {
      best = std::max(best, prec[j]);
    }
    ap += best / num_gt;
  }
  return ap;
}

std::array<double, 4> corner_hull(const bevrpn::GroundTruthObject & o)
{
  std::array<double, 4> h{1e300, 1e300, -1e300, -1e300};
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      const double x = o.x + std::cos(o.theta) * sx * o.l - std::sin(o.theta) * sy * o.w;
      const double y = o.y + std::sin(o.theta) * sx * o.l + std::cos(o.theta) * sy * o.w;
      h[0] = std::min(h[0], x);
      h[1] = std::min(h[1], y);
      h[2] = std::max(h[2], x);
      h[3] = std::max(h[3], y);
    }
  }
  return h;
}

std::optional<std::pair<double, double>> project(const Point3 & p, const bevrpn::Calibration & c)
{
  const double in[4] = {p.x, p.y, p.z, 1.0};
  double cam[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      cam[i] += c.velo_to_cam(i, j) * in[j];
    }
  }
  double rect[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      rect[i] += c.rectification(i, j) * cam[j];
    }
  }
  if (rect[2] <= 0) {
    return std::nullopt;
  }
  double img[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      img[i] += c.projection(i, j) * rect[j];
    }
  }
  if (img[2] <= 0) {
    return std::nullopt;
  }
  const double px = img[0] / img[2];
  const double py = img[1] / img[2];
  if (px < 0 || py < 0 || px >= c.image_width || py >= c.image_height) {
    return std::nullopt;
  }
  return std::make_pair(px, py);
}

std::vector<double> central_differences(
  const std::function<double(const std::vector<double> &)> & f, std::vector<double> x, double h)
{
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

double max_relative_error(const std::vector<double> & a, const std::vector<double> & b, double floor)
{
  double worst = a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    const double den = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / den);
  }
  return worst;
}

}  // namespace oracle
