#include "abslab/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "abslab/error.hpp"
#include "abslab/metrics.hpp"

namespace abslab {

namespace {

constexpr double kWindowFraction = 0.10;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt_cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("-");
}

}  // namespace

const std::vector<std::optional<double>>& MetricsTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return values[c];
  }
  throw ContractViolation(fmt::format("no column '{}'", name));
}

MetricsTable parse_metrics(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw IoError(fmt::format("{}: empty file", source));
  if (lines.front() != kMetricsHeader) {
    throw IoError(fmt::format("{} line 1: header does not match the metrics format", source));
  }

  MetricsTable table;
  for (auto name : split(lines.front(), ',')) table.columns.emplace_back(name);
  table.values.resize(table.columns.size());
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split(lines[n], ',');
    if (fields.size() != table.columns.size()) {
      throw IoError(fmt::format("{} line {}: expected {} fields, found {}", source, n + 1,
                                table.columns.size(), fields.size()));
    }
    if (n == 1) table.run_id = std::string(fields[0]);
    table.values[0].push_back(std::nullopt);  // run_id is textual
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty()) {
        table.values[c].push_back(std::nullopt);
        continue;
      }
      const std::string cell(fields[c]);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size()) {
        throw IoError(fmt::format("{} line {}: column '{}' holds non-numeric '{}'", source, n + 1,
                                  table.columns[c], cell));
      }
      table.values[c].push_back(v);
    }
  }
  const auto& steps = table.column("global_step");
  for (std::size_t r = 0; r < steps.size(); ++r) {
    if (!steps[r]) throw IoError(fmt::format("{} line {}: global_step is empty", source, r + 2));
  }
  return table;
}

MetricsTable read_metrics(const std::filesystem::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", csv.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_metrics(ss.str(), csv.string());
}

std::vector<std::size_t> window_rows(const MetricsTable& table, double fraction, bool late) {
  std::vector<std::size_t> out;
  const std::size_t n = table.rows();
  if (n == 0) return out;
  const auto& steps = table.column("global_step");
  const double final_step = *steps.back();
  for (std::size_t r = 0; r < n; ++r) {
    const double s = *steps[r];
    const bool inside = late ? s > (1.0 - fraction) * final_step : s <= fraction * final_step;
    if (inside) out.push_back(r);
  }
  if (out.empty()) out.push_back(late ? n - 1 : 0);
  return out;
}

std::optional<double> window_mean(const MetricsTable& table, std::string_view column, double fraction,
                                  bool late) {
  const auto& col = table.column(column);
  double sum = 0.0;
  int count = 0;
  for (std::size_t r : window_rows(table, fraction, late)) {
    if (!col[r]) continue;
    sum += *col[r];
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

RunSummary summarize(const MetricsTable& table, std::string label) {
  RunSummary s;
  s.label = std::move(label);
  s.run_id = table.run_id;
  s.rows = table.rows();
  if (s.rows == 0) return s;
  s.final_step = *table.column("global_step").back();
  s.early_mean = window_mean(table, "episodic_return_mean", kWindowFraction, false);
  s.late_mean = window_mean(table, "episodic_return_mean", kWindowFraction, true);

  const auto& col = table.column("episodic_return_mean");
  std::vector<double> late;
  for (std::size_t r : window_rows(table, kWindowFraction, true)) {
    if (col[r]) late.push_back(*col[r]);
  }
  if (late.size() >= 2) {
    double mean = 0.0;
    for (double v : late) mean += v;
    mean /= static_cast<double>(late.size());
    double ss = 0.0;
    for (double v : late) ss += (v - mean) * (v - mean);
    s.late_std = std::sqrt(ss / static_cast<double>(late.size() - 1));
  }
  return s;
}

std::string summary_table(const std::vector<RunSummary>& runs) {
  std::size_t width = 3;
  for (const auto& r : runs) width = std::max(width, r.label.size());
  std::string out = fmt::format("{:<{}}  {:>8}  {:>12}  {:>12}  {:>12}  {:>10}\n", "run", width, "rows",
                                "final_step", "early_mean", "late_mean", "late_std");
  for (const auto& r : runs) {
    out += fmt::format("{:<{}}  {:>8}  {:>12}  {:>12}  {:>12}  {:>10}\n", r.label, width, r.rows,
                       static_cast<long long>(r.final_step), fmt_cell(r.early_mean), fmt_cell(r.late_mean),
                       fmt_cell(r.late_std));
  }
  return out;
}

}  // namespace abslab
