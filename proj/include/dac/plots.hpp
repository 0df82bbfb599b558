#pragma once

#include <string>
#include <vector>

#include "dac/harness.hpp"

namespace dac {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label = "t [s]";
  std::string y_label;
  int width = 860;
  int height = 360;
};

// Minimal line chart: axes, ticks, legend, one polyline per series. Points
// with non-finite coordinates split the polyline instead of being drawn.
void write_line_chart(const std::string& path, const ChartSpec& spec,
                      const std::vector<Series>& series);

// Standard figure set for one or two finished runs. When the comparison run
// is present its error trace is overlaid on the first figure.
void write_run_plots(const std::string& dir, const RunResult& primary,
                     const RunResult* comparison = nullptr);

}  // namespace dac
