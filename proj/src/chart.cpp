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

#include "gmedian/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gmedian {
namespace {

constexpr double kPanelWidth = 480.0;
constexpr double kPanelHeight = 360.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Bounds {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -std::numeric_limits<double>::infinity();
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) return;
    x_lo = std::min(x_lo, std::log10(x));
    x_hi = std::max(x_hi, std::log10(x));
    y_lo = std::min(y_lo, std::log10(y));
    y_hi = std::max(y_hi, std::log10(y));
  }

  bool empty() const { return !(x_lo <= x_hi); }
};

void render_panel(std::ostringstream& out, const ChartPanel& panel, double offset_x) {
  Bounds b;
  for (const auto& s : panel.series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) b.add(s.x[k], s.y[k]);
  }
  if (b.empty()) {
    b.add(1.0, 1.0);
    b.add(10.0, 10.0);
  }
  for (const auto& r : panel.references) {
    b.add(std::pow(10.0, b.x_lo), r.anchor_y * std::pow(std::pow(10.0, b.x_lo) / r.anchor_x, r.slope));
    b.add(std::pow(10.0, b.x_hi), r.anchor_y * std::pow(std::pow(10.0, b.x_hi) / r.anchor_x, r.slope));
  }
  const double x_pad = std::max(0.05, 0.05 * (b.x_hi - b.x_lo));
  const double y_pad = std::max(0.05, 0.05 * (b.y_hi - b.y_lo));
  const double x0 = b.x_lo - x_pad;
  const double x1 = b.x_hi + x_pad;
  const double y0 = b.y_lo - y_pad;
  const double y1 = b.y_hi + y_pad;

  const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
  const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
  const double left = offset_x + kMarginLeft;
  const double top = kMarginTop;
  auto sx = [&](double lx) { return left + (lx - x0) / (x1 - x0) * plot_w; };
  auto sy = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * plot_h; };

  out << "<g class=\"panel\">\n";
  out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(top - 20)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(panel.title) << "</text>\n";
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Decade ticks.
  for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d) {
    out << "<line x1=\"" << num(sx(d)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(sx(d))
        << "\" y2=\"" << num(top + plot_h + 5) << "\" stroke=\"#444\"/>"
        << "<text x=\"" << num(sx(d)) << "\" y=\"" << num(top + plot_h + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d) {
    out << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(d)) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(sy(d)) << "\" stroke=\"#444\"/>"
        << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(d) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(top + plot_h + 38)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  out << "<text x=\"" << num(offset_x + 16) << "\" y=\"" << num(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(offset_x + 16)
      << ' ' << num(top + plot_h / 2) << ")\">" << escape(panel.y_label) << "</text>\n";

  for (const auto& r : panel.references) {
    const double ly_at = [&](double lx) {
      return std::log10(r.anchor_y) + r.slope * (lx - std::log10(r.anchor_x));
    }(b.x_lo);
    const double ly_end = std::log10(r.anchor_y) + r.slope * (b.x_hi - std::log10(r.anchor_x));
    out << "<line class=\"reference\" data-slope=\"" << num(r.slope) << "\" x1=\"" << num(sx(b.x_lo))
        << "\" y1=\"" << num(sy(ly_at)) << "\" x2=\"" << num(sx(b.x_hi)) << "\" y2=\""
        << num(sy(ly_end)) << "\" stroke=\"" << r.color << "\" stroke-dasharray=\"6 4\"><title>"
        << escape(r.label) << "</title></line>\n";
  }

  double legend_y = top + 16;
  for (const auto& s : panel.series) {
    std::ostringstream pts;
    std::vector<std::pair<double, double>> xy;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (s.x[k] > 0.0 && s.y[k] > 0.0 && std::isfinite(s.y[k])) {
        xy.emplace_back(sx(std::log10(s.x[k])), sy(std::log10(s.y[k])));
      }
    }
    for (const auto& [px, py] : xy) pts << num(px) << ',' << num(py) << ' ';
    out << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color << "\" points=\""
        << pts.str() << "\"/>\n";
    if (s.markers) {
      for (const auto& [px, py] : xy) {
        out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << s.color
            << "\"/>\n";
      }
    }
    out << "<text x=\"" << num(left + plot_w - 8) << "\" y=\"" << num(legend_y)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << s.color << "\">" << escape(s.label)
        << "</text>\n";
    legend_y += 14;
  }
  out << "</g>\n";
}

}  // namespace

std::string render_loglog_svg(std::span<const ChartPanel> panels, std::string_view title) {
  const double width = kPanelWidth * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(kPanelHeight) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(kPanelHeight)
      << "\" font-family=\"sans-serif\">\n";
  out << "<title>" << escape(title) << "</title>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    render_panel(out, panels[k], kPanelWidth * static_cast<double>(k));
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gmedian
