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

#include "bevrpn/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bevrpn
{

namespace
{

constexpr std::array<const char *, 6> kPalette = {
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string & s)
{
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::pair<double, double> data_range(std::span<const Series> series, bool x_axis)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto & s : series) {
    for (const auto & [x, y] : s.points) {
      const double v = x_axis ? x : y;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    return {0.0, 1.0};
  }
  if (hi - lo < 1e-12) {
    return {lo - 0.5, hi + 0.5};
  }
  return {lo, hi};
}

}  // namespace

std::string svg_line_plot(const PlotSpec & spec, std::span<const Series> series)
{
  const auto [x0, x1] = spec.x_range.value_or(data_range(series, true));
  const auto [y0, y1] = spec.y_range.value_or(data_range(series, false));
  const double left = 64;
  const double right = spec.width - 150;
  const double top = 36;
  const double bottom = spec.height - 52;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
  auto sy = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num((left + right) / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
    << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x0 + (x1 - x0) * i / kTicks;
    const double yv = y0 + (y1 - y0) * i / kTicks;
    o << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(sx(xv)) << "\" y2=\""
      << num(bottom + 4) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(bottom + 17) << "\" text-anchor=\"middle\">"
      << tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << num(right) << "\" y2=\""
      << num(sy(yv)) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << num(left - 7) << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">"
      << tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << spec.height - 12
    << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << num((top + bottom) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char * color = kPalette[i % kPalette.size()];
    const auto & s = series[i];
    if (!s.points.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < s.points.size(); ++k) {
        o << (k ? " " : "") << num(sx(s.points[k].first)) << ',' << num(sy(s.points[k].second));
      }
      o << "\"/>\n";
      for (const auto & [x, y] : s.points) {
        o << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
      }
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << num(right + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(right + 32)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(right + 38) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bevrpn
