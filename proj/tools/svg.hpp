#pragma once

#include <string>
#include <vector>

namespace slowman::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // draw points instead of a polyline
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Self-contained SVG line plot. Non-finite points (and non-positive ones on
/// log axes) are skipped. Output depends only on the inputs.
[[nodiscard]] std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace slowman::cli
