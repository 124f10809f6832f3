#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace abslab {

// One training iteration. Quantities that do not apply to the mode or were
// not measured this iteration stay empty and are written as empty fields.
struct MetricsRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::int64_t global_step = 0;
  std::optional<int> rollout_len;
  std::optional<int> batch_size;
  std::optional<int> epochs_used;
  std::optional<double> epsilon;
  std::optional<double> divergence_raw;
  std::optional<double> divergence_smoothed;
  std::optional<double> gns_value;
  std::optional<double> loss_mean;
  std::optional<double> episodic_return_mean;
  int episodic_return_count = 0;
  std::optional<double> wall_ms;
};

inline constexpr const char* kMetricsHeader =
    "run_id,seed,iteration,global_step,rollout_len,batch_size,epochs_used,epsilon,divergence_raw,"
    "divergence_smoothed,gns_value,loss_mean,episodic_return_mean,episodic_return_count,wall_ms";

// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string format_row(const MetricsRow& row);

// Writes the header on construction and flushes after every row, so an
// aborted run keeps everything logged so far. Throws IoError.
class CsvLog {
 public:
  CsvLog(const std::filesystem::path& path, std::string header);

  void write_line(const std::string& line);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Trailing mean over the most recent `capacity` finished episodes.
class ReturnTracker {
 public:
  explicit ReturnTracker(int capacity = 100) : capacity_(capacity) {}

  void add(double episode_return);
  std::optional<double> mean() const;
  int size() const { return static_cast<int>(recent_.size()); }

 private:
  int capacity_;
  std::deque<double> recent_;
};

}  // namespace abslab
