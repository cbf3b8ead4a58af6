#pragma once

// Minimal static SVG writer for convergence plots: polylines over a
// logarithmic y-axis, iterations on x.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fbiga {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // nonpositive and NaN entries are skipped
  std::string color = "#1f77b4";
};

inline void write_log_plot(std::ostream& os, const std::string& title, const std::string& x_label,
                           const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  double xmin = 1e300, xmax = -1e300, lmin = 1e300, lmax = -1e300;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!(s.y[k] > 0.0) || !std::isfinite(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      lmin = std::min(lmin, std::log10(s.y[k]));
      lmax = std::max(lmax, std::log10(s.y[k]));
    }
  if (xmin > xmax) xmin = 0, xmax = 1, lmin = -1, lmax = 0;
  if (xmax == xmin) xmax = xmin + 1;
  const int d0 = static_cast<int>(std::floor(lmin)), d1 = std::max(static_cast<int>(std::ceil(lmax)), d0 + 1);

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double l) { return top + (d1 - l) / (d1 - d0) * (H - top - bottom); };

  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << std::setprecision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << title << "</text>\n";
  o << "<g stroke=\"#ccc\" stroke-width=\"0.5\" font-family=\"sans-serif\" font-size=\"10\">\n";
  const int step = std::max(1, (d1 - d0) / 8);
  for (int d = d0; d <= d1; d += step) {
    o << "<line x1=\"" << left << "\" y1=\"" << py(d) << "\" x2=\"" << W - right << "\" y2=\"" << py(d) << "\"/>\n"
      << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 3 << "\" text-anchor=\"end\" stroke=\"none\">1e" << d
      << "</text>\n";
  }
  const int xi0 = static_cast<int>(std::ceil(xmin)), xi1 = static_cast<int>(std::floor(xmax));
  const int xstep = std::max(1, (xi1 - xi0) / 10);
  for (int x = xi0; x <= xi1; x += xstep)
    o << "<text x=\"" << px(x) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\" stroke=\"none\">" << x
      << "</text>\n";
  o << "</g>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
    << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& S = series[s];
    o << "<polyline fill=\"none\" stroke=\"" << S.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < S.x.size() && k < S.y.size(); ++k) {
      if (!(S.y[k] > 0.0) || !std::isfinite(S.y[k])) continue;
      o << px(S.x[k]) << ',' << py(std::log10(S.y[k])) << ' ';
    }
    o << "\"/>\n";
    const double ly = top + 16 + 18.0 * s;
    o << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << S.color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << W - right + 35 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << S.label << "</text>\n";
  }
  o << "</svg>\n";
  os << o.str();
}

}  // namespace fbiga
