#include "pvl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pvl {

namespace {

std::string fmt(double v, int prec = 3) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

// Blue-to-warm ramp.
std::string color_for(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r = static_cast<int>(40 + 215 * t);
  int g = static_cast<int>(60 + 120 * (1.0 - std::abs(t - 0.5) * 2.0));
  int b = static_cast<int>(200 - 170 * t);
  std::ostringstream ss;
  ss << "rgb(" << r << ',' << g << ',' << b << ')';
  return ss.str();
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#17becf", "#e377c2",
                               "#7f7f7f"};

}  // namespace

std::string svg_heatmap(const HeatmapSpec& spec) {
  const int rows = static_cast<int>(spec.values.size());
  const int cols = rows > 0 ? static_cast<int>(spec.values[0].size()) : 0;
  const int cell = 64, left = 90, top = 50, bottom = 60, right = 30;
  const int width = left + cols * cell + right;
  const int height = top + rows * cell + bottom;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' font-family='sans-serif'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-size='15'>" << spec.title << "</text>\n";

  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double v = spec.values[y][x];
      int px = left + x * cell;
      int py = top + y * cell;
      if (std::isnan(v)) {
        svg << "<rect x='" << px << "' y='" << py << "' width='" << cell
            << "' height='" << cell
            << "' fill='#dddddd' stroke='white'/>\n";
        svg << "<text x='" << px + cell / 2 << "' y='" << py + cell / 2 + 4
            << "' text-anchor='middle' font-size='11'>n/a</text>\n";
        continue;
      }
      double t = (v - spec.v_min) /
                 std::max(spec.v_max - spec.v_min, 1e-12);
      svg << "<rect x='" << px << "' y='" << py << "' width='" << cell
          << "' height='" << cell << "' fill='" << color_for(t)
          << "' stroke='white'/>\n";
      svg << "<text x='" << px + cell / 2 << "' y='" << py + cell / 2 + 4
          << "' text-anchor='middle' font-size='12' fill='white'>" << fmt(v)
          << "</text>\n";
    }
  }
  for (int x = 0; x < cols && x < static_cast<int>(spec.x_ticks.size()); ++x)
    svg << "<text x='" << left + x * cell + cell / 2 << "' y='"
        << top + rows * cell + 18
        << "' text-anchor='middle' font-size='12'>" << spec.x_ticks[x]
        << "</text>\n";
  for (int y = 0; y < rows && y < static_cast<int>(spec.y_ticks.size()); ++y)
    svg << "<text x='" << left - 8 << "' y='" << top + y * cell + cell / 2 + 4
        << "' text-anchor='end' font-size='12'>" << spec.y_ticks[y]
        << "</text>\n";
  svg << "<text x='" << left + cols * cell / 2 << "' y='" << height - 16
      << "' text-anchor='middle' font-size='13'>" << spec.x_label
      << "</text>\n";
  svg << "<text x='18' y='" << top + rows * cell / 2
      << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
      << top + rows * cell / 2 << ")'>" << spec.y_label << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_line_chart(const LineChartSpec& spec) {
  const int width = 640, height = 420;
  const int left = 70, top = 50, right = 160, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (spec.y_min) y_min = *spec.y_min;
  if (spec.y_max) y_max = *spec.y_max;
  if (x_max - x_min < 1e-12) x_max = x_min + 1.0;
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;

  auto px = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  auto py = [&](double y) {
    return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' font-family='sans-serif'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-size='15'>" << spec.title << "</text>\n";
  svg << "<rect x='" << left << "' y='" << top << "' width='" << plot_w
      << "' height='" << plot_h << "' fill='none' stroke='#888'/>\n";

  for (int i = 0; i <= 4; ++i) {
    double xv = x_min + (x_max - x_min) * i / 4.0;
    double yv = y_min + (y_max - y_min) * i / 4.0;
    svg << "<text x='" << px(xv) << "' y='" << top + plot_h + 18
        << "' text-anchor='middle' font-size='11'>" << fmt(xv) << "</text>\n";
    svg << "<text x='" << left - 6 << "' y='" << py(yv) + 4
        << "' text-anchor='end' font-size='11'>" << fmt(yv) << "</text>\n";
    svg << "<line x1='" << left << "' y1='" << py(yv) << "' x2='"
        << left + plot_w << "' y2='" << py(yv)
        << "' stroke='#eee'/>\n";
  }

  int ci = 0;
  for (const auto& s : spec.series) {
    const char* color = kSeriesColors[ci % 9];
    svg << "<polyline fill='none' stroke='" << color
        << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    svg << "'/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
          << "' r='3' fill='" << color << "'/>\n";
    svg << "<text x='" << left + plot_w + 12 << "' y='" << top + 16 + ci * 18
        << "' font-size='12' fill='" << color << "'>" << s.label
        << "</text>\n";
    ++ci;
  }
  svg << "<text x='" << left + plot_w / 2 << "' y='" << height - 14
      << "' text-anchor='middle' font-size='13'>" << spec.x_label
      << "</text>\n";
  svg << "<text x='20' y='" << top + plot_h / 2
      << "' text-anchor='middle' font-size='13' transform='rotate(-90 20 "
      << top + plot_h / 2 << ")'>" << spec.y_label << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace pvl
