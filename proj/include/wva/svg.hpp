#pragma once

#include <string>
#include <vector>

namespace wva::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // non-finite values break the polyline
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// SVG 1.1 document with the panels stacked vertically.
std::string render(const std::vector<Panel>& panels, int width = 720, int panel_height = 300);

}  // namespace wva::svg
