// Copyright 2026 The gmedian Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmedian {

struct ChartSeries {
  std::string label;
  std::string color = "#d6336c";
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

/// y = anchor_y * (x / anchor_x)^slope, drawn across the panel.
struct ReferenceLine {
  double slope = -1.0;
  double anchor_x = 1.0;
  double anchor_y = 1.0;
  std::string label;
  std::string color = "#000000";
};

struct ChartPanel {
  std::string title;
  std::string x_label = "p";
  std::string y_label;
  std::vector<ChartSeries> series;
  std::vector<ReferenceLine> references;
};

/// Self-contained SVG with the panels side by side on log10-log10 axes.
/// Non-positive values are skipped. Reference lines carry their slope in a
/// data-slope attribute.
std::string render_loglog_svg(std::span<const ChartPanel> panels, std::string_view title);

}  // namespace gmedian
