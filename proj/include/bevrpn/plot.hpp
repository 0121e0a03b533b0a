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

#ifndef BEVRPN__PLOT_HPP_
#define BEVRPN__PLOT_HPP_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bevrpn
{

struct Series
{
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec
{
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  int width{640};
  int height{420};
};

/// Static SVG line chart with axes, ticks and a legend.
std::string svg_line_plot(const PlotSpec & spec, std::span<const Series> series);

}  // namespace bevrpn

#endif  // BEVRPN__PLOT_HPP_
