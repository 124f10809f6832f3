#pragma once

#include <cstdint>
#include <string>

#include "abslab/config.hpp"

namespace abslab {

// Exit statuses shared by the library and the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitIo = 3;

struct RunOutcome {
  int status = kExitOk;
  std::string message;  // empty on success
  std::int64_t iterations = 0;
  std::int64_t global_step = 0;
};

// "<mode>-<env>-s<seed>".
std::string run_id(const ExperimentConfig& cfg);

// Trains the configured mode until total_steps environment steps have been
// collected. Writes into cfg.out_dir:
//
//   config.resolved  every effective key, replayable as a config file
//   metrics.csv      one MetricsRow per iteration, flushed row by row
//   schedule.csv     adaptive modes: one line per scheduler measurement
//   checkpoint.bin   final Q network, or policy mean network for PPO
//                    (PPO adds value.bin and log_std.txt)
//
// Errors are reported through the status instead of thrown: 1 for an
// invalid config, 2 when training produced non-finite values (rows written
// so far are kept), 3 for file system failures.
RunOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace abslab
