#include "wva/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace wva::svg {

namespace {

const char* const kColors[] = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo <= 1e-300 * std::max(1.0, std::abs(lo))) {
      const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render(const std::vector<Panel>& panels, int width, int panel_height) {
  const double left = 80.0;
  const double right = 20.0;
  const double top = 30.0;
  const double bottom = 50.0;
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(panels.size(), 1));

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double y0 = static_cast<double>(p) * panel_height;
    const double pw = width - left - right;
    const double ph = panel_height - top - bottom;
    Range xr;
    Range yr;
    for (const auto& s : panel.series) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (std::isfinite(s.y[i])) {
          xr.add(s.x[i]);
          yr.add(s.y[i]);
        }
      }
    }
    xr.finish();
    yr.finish();
    const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return y0 + top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    out += "<g>\n";
    out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\" font-size=\"13\">" +
           escape(panel.title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(y0 + top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double fx = xr.lo + (xr.hi - xr.lo) * k / 4.0;
      const double fy = yr.lo + (yr.hi - yr.lo) * k / 4.0;
      out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(y0 + top + ph + 15) + "\" text-anchor=\"middle\">" +
             tick(fx) + "</text>\n";
      out += "<text x=\"" + num(left - 5) + "\" y=\"" + num(py(fy) + 4) + "\" text-anchor=\"end\">" + tick(fy) +
             "</text>\n";
    }
    out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(y0 + panel_height - 12) +
           "\" text-anchor=\"middle\">" + escape(panel.x_label) + "</text>\n";
    out += "<text transform=\"translate(14," + num(y0 + top + ph / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + escape(panel.y_label) + "</text>\n";

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const auto& s = panel.series[si];
      const char* color = kColors[si % std::size(kColors)];
      std::string points;
      const auto flush = [&] {
        if (!points.empty()) {
          out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
                 points + "\"/>\n";
          points.clear();
        }
      };
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        if (!points.empty()) points += ' ';
        points += num(px(s.x[i])) + "," + num(py(s.y[i]));
      }
      flush();
      out += "<text x=\"" + num(left + pw - 5) + "\" y=\"" + num(y0 + top + 14 + 14 * static_cast<double>(si)) +
             "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace wva::svg
