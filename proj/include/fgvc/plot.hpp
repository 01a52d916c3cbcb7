#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fgvc {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line chart with markers, axes and a legend.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label);

}  // namespace fgvc
