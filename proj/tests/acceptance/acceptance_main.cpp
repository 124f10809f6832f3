#include <cstdio>
#include <filesystem>

#include <fmt/format.h>

#include "criteria.hpp"

// Prints one PASS/FAIL line per acceptance criterion. Optional arguments:
// work directory for training runs, then the config directory.
int main(int argc, char** argv) {
  const std::filesystem::path work_dir = argc > 1 ? argv[1] : "acceptance_runs";
  const std::filesystem::path config_dir = argc > 2 ? argv[2] : ABSLAB_CONFIG_DIR;
  const auto results = abslab::checks::run_criteria(abslab::checks::Scope::kFull, work_dir, config_dir);
  int failed = 0;
  for (const auto& r : results) {
    fmt::print("{}\n", abslab::checks::format_result(r));
    failed += r.passed ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", results.size() - failed, results.size());
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
