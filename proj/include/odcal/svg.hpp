#pragma once

#include <string>
#include <vector>

namespace odcal {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> values;  // plotted against 1-based index
};

/// Polyline chart of one or more series against their index (iterations).
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::vector<SvgSeries>& series);

/// Scatter with a y=x reference line, one point per (truth, estimate) pair.
std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<double>& x,
                        const std::vector<double>& y);

}  // namespace odcal
