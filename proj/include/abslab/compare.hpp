#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace abslab {

// Numeric view of a metrics.csv. Every column except run_id is parsed;
// empty fields become nullopt.
struct MetricsTable {
  std::string run_id;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> values;  // [column][row]

  std::size_t rows() const { return values.empty() ? 0 : values.front().size(); }
  // Throws ContractViolation for unknown names.
  const std::vector<std::optional<double>>& column(std::string_view name) const;
};

// Throws IoError for unreadable files and malformed content; row errors name
// the offending line.
MetricsTable parse_metrics(std::string_view text, const std::string& source = "metrics.csv");
MetricsTable read_metrics(const std::filesystem::path& csv);

// Rows whose global_step falls in the first (`late` false) or last (`late`
// true) `fraction` of the run's final step. Never empty for a non-empty
// table: the first or last row is always included.
std::vector<std::size_t> window_rows(const MetricsTable& table, double fraction, bool late);

// Mean of the non-empty values of `column` over the window, nullopt if none.
std::optional<double> window_mean(const MetricsTable& table, std::string_view column, double fraction,
                                  bool late);

struct RunSummary {
  std::string label;
  std::string run_id;
  std::size_t rows = 0;
  double final_step = 0.0;
  std::optional<double> early_mean;
  std::optional<double> late_mean;
  std::optional<double> late_std;  // sample standard deviation
};

// Episodic return statistics over the first and last 10% of the run.
RunSummary summarize(const MetricsTable& table, std::string label);

// Fixed-width text table, one line per run after a header line.
std::string summary_table(const std::vector<RunSummary>& runs);

}  // namespace abslab
