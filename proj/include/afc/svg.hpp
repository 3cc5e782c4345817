#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace afc::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Polyline chart with a frame, min/max tick labels and a legend.
inline std::string line_plot(const std::vector<Series>& series, const std::string& xlabel, const std::string& ylabel) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  const double w = 640, h = 400, l = 70, r = 20, t = 20, b = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto px = [&](double x) { return l + (x - x0) / (x1 - x0) * (w - l - r); };
  auto py = [&](double y) { return h - b - (y - y0) / (y1 - y0) * (h - t - b); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << w - l - r << "\" height=\"" << h - t - b
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << l << "\" y=\"" << h - b + 16 << "\">" << fmt(x0) << "</text>\n";
  os << "<text x=\"" << w - r << "\" y=\"" << h - b + 16 << "\" text-anchor=\"end\">" << fmt(x1) << "</text>\n";
  os << "<text x=\"" << l - 4 << "\" y=\"" << h - b << "\" text-anchor=\"end\">" << fmt(y0) << "</text>\n";
  os << "<text x=\"" << l - 4 << "\" y=\"" << t + 10 << "\" text-anchor=\"end\">" << fmt(y1) << "</text>\n";
  os << "<text x=\"" << (l + w - r) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text transform=\"translate(16," << (t + h - b) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 5];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << w - r - 6 << "\" y=\"" << t + 16 + 14 * k << "\" text-anchor=\"end\" fill=\"" << c << "\">"
       << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace afc::svg
