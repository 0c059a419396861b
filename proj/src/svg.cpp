#include "odcal/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace odcal {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 40.0, kBottom = 48.0;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

std::string header(const std::string& title) {
  std::string s = fmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
      "viewBox=\"0 0 %.0f %.0f\">\n",
      kWidth, kHeight, kWidth, kHeight);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.0f", kWidth / 2) +
       "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title +
       "</text>\n";
  return s;
}

std::string axes(const std::string& x_label, const std::string& y_label, double y_min,
                 double y_max) {
  std::string s;
  s += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
           kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
  s += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
           kTop, kLeft, kHeight - kBottom);
  s += "<text x=\"" + fmt("%.0f", (kLeft + kWidth - kRight) / 2) + "\" y=\"" +
       fmt("%.0f", kHeight - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
       "</text>\n";
  s += "<text x=\"14\" y=\"" + fmt("%.0f", (kTop + kHeight - kBottom) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
       "14 " +
       fmt("%.0f", (kTop + kHeight - kBottom) / 2) + ")\">" + y_label + "</text>\n";
  s += "<text x=\"" + fmt("%.0f", kLeft - 6) + "\" y=\"" + fmt("%.0f", kHeight - kBottom + 4) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.3g", y_min) +
       "</text>\n";
  s += "<text x=\"" + fmt("%.0f", kLeft - 6) + "\" y=\"" + fmt("%.0f", kTop + 4) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.3g", y_max) +
       "</text>\n";
  return s;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::vector<SvgSeries>& series) {
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  std::size_t n = 0;
  for (const SvgSeries& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (std::isfinite(v)) {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
    }
  }
  if (!(y_min < y_max)) {
    y_min = std::isfinite(y_min) ? y_min - 1.0 : 0.0;
    y_max = y_min + 2.0;
  }
  const double x_span = std::max<std::size_t>(n, 2) - 1.0;
  auto px = [&](double i) { return kLeft + (kWidth - kLeft - kRight) * i / x_span; };
  auto py = [&](double v) {
    return kHeight - kBottom - (kHeight - kTop - kBottom) * (v - y_min) / (y_max - y_min);
  };

  std::string svg = header(title) + axes(x_label, "value", y_min, y_max);
  double legend_y = kTop + 4;
  for (const SvgSeries& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!std::isfinite(s.values[i])) continue;
      pts += fmt("%.1f,%.1f ", px(static_cast<double>(i)), py(s.values[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    svg += "<text x=\"" + fmt("%.0f", kWidth - kRight - 4) + "\" y=\"" + fmt("%.0f", legend_y) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + s.color +
           "\">" + s.label + "</text>\n";
    legend_y += 14;
  }
  return svg + "</svg>\n";
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<double>& x,
                        const std::vector<double>& y) {
  double lo = 0.0, hi = 1.0;
  if (!x.empty()) {
    hi = 0.0;
    for (double v : x) hi = std::max(hi, v);
    for (double v : y) hi = std::max(hi, v);
    hi = hi > 0.0 ? 1.05 * hi : 1.0;
  }
  auto px = [&](double v) { return kLeft + (kWidth - kLeft - kRight) * (v - lo) / (hi - lo); };
  auto py = [&](double v) {
    return kHeight - kBottom - (kHeight - kTop - kBottom) * (v - lo) / (hi - lo);
  };
  std::string svg = header(title) + axes(x_label, y_label, lo, hi);
  svg += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#999\" "
             "stroke-dasharray=\"4 3\"/>\n",
             px(lo), py(lo), px(hi), py(hi));
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    svg += fmt("<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n",
               px(x[i]), py(y[i]));
  }
  return svg + "</svg>\n";
}

}  // namespace odcal
