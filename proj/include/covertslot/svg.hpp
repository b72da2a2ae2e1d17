/**
 * Self-contained SVG line charts for the sweep reports.  Output is plain
 * markup with fixed formatting, so identical inputs produce identical bytes.
 */
#pragma once

#include <string>
#include <vector>

namespace covertslot::svg {

struct Series {
  std::string label;
  std::string color = "#1f6fb2";
  bool dashed = false;
  bool markers = false;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 760;
  int height = 480;
  std::vector<Series> series;
};

std::string render_line_chart(const ChartSpec& spec);

}  // namespace covertslot::svg
