#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "abslab/compare.hpp"

namespace abslab {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), x ascending
};

// Standalone SVG line chart with axes, tick labels and a legend.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series);

// (global_step, value) for the rows where `column` is present.
Series series_from(const MetricsTable& table, const std::string& column, std::string name);

// Writes return.svg, rollout_len.svg and divergence.svg into `dir`, one line
// per run. Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> write_charts(const std::vector<std::pair<std::string, MetricsTable>>& runs,
                                                const std::filesystem::path& dir);

}  // namespace abslab
