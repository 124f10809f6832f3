#include "abslab/metrics.hpp"

#include <numeric>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab {

namespace {

template <typename T>
std::string field(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return fmt::format("{}", *v);
  }
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

std::string format_row(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.run_id, r.seed, r.iteration,
                     r.global_step, field(r.rollout_len), field(r.batch_size), field(r.epochs_used),
                     field(r.epsilon), field(r.divergence_raw), field(r.divergence_smoothed),
                     field(r.gns_value), field(r.loss_mean), field(r.episodic_return_mean),
                     r.episodic_return_count, field(r.wall_ms));
}

CsvLog::CsvLog(const std::filesystem::path& path, std::string header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  write_line(header);
}

void CsvLog::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError(fmt::format("write to '{}' failed", path_.string()));
}

void ReturnTracker::add(double episode_return) {
  recent_.push_back(episode_return);
  if (size() > capacity_) recent_.pop_front();
}

std::optional<double> ReturnTracker::mean() const {
  if (recent_.empty()) return std::nullopt;
  return std::accumulate(recent_.begin(), recent_.end(), 0.0) / static_cast<double>(recent_.size());
}

}  // namespace abslab
