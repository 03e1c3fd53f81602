#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pvl {

// Minimal standalone SVG emitters: a labeled heatmap and a multi-series
// line chart. No external renderer involved.

struct HeatmapSpec {
  std::string title;
  std::string x_label, y_label;
  std::vector<std::string> x_ticks, y_ticks;
  // values[y][x]; NaN cells render hatched gray
  std::vector<std::vector<double>> values;
  double v_min = 0.0, v_max = 1.0;
};

std::string svg_heatmap(const HeatmapSpec& spec);

struct LineSeries {
  std::string label;
  std::vector<double> x, y;
};

struct LineChartSpec {
  std::string title;
  std::string x_label, y_label;
  std::vector<LineSeries> series;
  std::optional<double> y_min, y_max;
};

std::string svg_line_chart(const LineChartSpec& spec);

}  // namespace pvl
