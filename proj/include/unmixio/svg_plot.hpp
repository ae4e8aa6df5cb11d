#pragma once

#include "unmixio/core.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace unmixio {

// One polyline; x and y must be the same length.
struct PlotSeries {
  std::string color = "#CC00CC";
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotPanel {
  std::string label;
  std::vector<PlotSeries> series;
};

// A rows x cols grid of small line plots sharing one axis range, rendered to
// a standalone SVG string. Intended for quick visual comparison of pairwise
// spectra, not publication output.
struct PanelGrid {
  std::string title;
  int rows = 1;
  int cols = 1;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::string x_label;
  std::string y_label;
  std::vector<PlotPanel> panels;  // row-major, may be shorter than rows*cols
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

inline std::string render_panel_grid_svg(const PanelGrid& grid) {
  if (grid.rows < 1 || grid.cols < 1)
    throw InvalidArgument("panel grid needs at least one row and column");
  if (!(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
    throw InvalidArgument("axis ranges must be nonempty");
  const double panel_w = 170.0, panel_h = 120.0;
  const double gap = 18.0, margin = 46.0, top = 34.0;
  const double width = margin + grid.cols * (panel_w + gap) + gap;
  const double height = top + grid.rows * (panel_h + gap) + margin;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::svg_num(width) + "\" height=\"" + detail::svg_num(height) +
         "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
         detail::svg_num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" + grid.title + "</text>\n";
  for (std::size_t idx = 0; idx < grid.panels.size(); ++idx) {
    const int r = static_cast<int>(idx) / grid.cols;
    const int c = static_cast<int>(idx) % grid.cols;
    if (r >= grid.rows) break;
    const double x0 = margin + c * (panel_w + gap);
    const double y0 = top + r * (panel_h + gap);
    svg += "<rect x=\"" + detail::svg_num(x0) + "\" y=\"" +
           detail::svg_num(y0) + "\" width=\"" + detail::svg_num(panel_w) +
           "\" height=\"" + detail::svg_num(panel_h) +
           "\" fill=\"none\" stroke=\"#888\" stroke-width=\"0.7\"/>\n";
    const PlotPanel& panel = grid.panels[idx];
    if (!panel.label.empty())
      svg += "<text x=\"" + detail::svg_num(x0 + 4) + "\" y=\"" +
             detail::svg_num(y0 + 12) +
             "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#333\">" +
             panel.label + "</text>\n";
    for (const PlotSeries& s : panel.series) {
      if (s.x.size() != s.y.size())
        throw InvalidArgument("plot series has mismatched x/y lengths");
      if (s.x.empty()) continue;
      std::string points;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double fx = (s.x[i] - grid.x_min) / (grid.x_max - grid.x_min);
        double fy = (s.y[i] - grid.y_min) / (grid.y_max - grid.y_min);
        fy = std::clamp(fy, 0.0, 1.0);
        if (!points.empty()) points += ' ';
        points += detail::svg_num(x0 + fx * panel_w) + "," +
                  detail::svg_num(y0 + (1.0 - fy) * panel_h);
      }
      svg += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.1\" points=\"" + points + "\"/>\n";
    }
    // axis extremes, bottom-left and bottom-right of each panel
    svg += "<text x=\"" + detail::svg_num(x0) + "\" y=\"" +
           detail::svg_num(y0 + panel_h + 10) +
           "\" font-family=\"sans-serif\" font-size=\"7\" fill=\"#666\">" +
           detail::svg_num(grid.x_min) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(x0 + panel_w) + "\" y=\"" +
           detail::svg_num(y0 + panel_h + 10) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"7\" "
           "fill=\"#666\">" + detail::svg_num(grid.x_max) + "</text>\n";
  }
  svg += "<text x=\"" + detail::svg_num(width / 2) + "\" y=\"" +
         detail::svg_num(height - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"10\" fill=\"#333\">" + grid.x_label + "</text>\n";
  svg += "<text x=\"12\" y=\"" + detail::svg_num(height / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"10\" fill=\"#333\" transform=\"rotate(-90 12 " +
         detail::svg_num(height / 2) + ")\">" + grid.y_label + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace unmixio
