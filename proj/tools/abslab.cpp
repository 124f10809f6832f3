#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "abslab/compare.hpp"
#include "abslab/config.hpp"
#include "abslab/error.hpp"
#include "abslab/experiment.hpp"
#include "abslab/svg.hpp"
#include "criteria.hpp"

namespace {

int train(const std::string& config_path, const std::optional<std::string>& mode,
          const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out) {
  abslab::ConfigOverrides overrides;
  overrides.seed = seed;
  overrides.out_dir = out;
  abslab::ExperimentConfig cfg;
  try {
    if (mode) overrides.mode = abslab::parse_mode(*mode);
    cfg = abslab::parse_config(config_path, overrides);
  } catch (const abslab::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return abslab::kExitConfig;
  }
  fmt::print("training {} into {}\n", abslab::run_id(cfg), cfg.out_dir);
  const abslab::RunOutcome outcome = abslab::run_experiment(cfg);
  if (outcome.status != abslab::kExitOk) {
    fmt::print(stderr, "error: {}\n", outcome.message);
  } else {
    fmt::print("done: {} iterations, {} steps\n", outcome.iterations, outcome.global_step);
  }
  return outcome.status;
}

int compare(const std::vector<std::string>& dirs, bool svg, const std::string& svg_dir) {
  try {
    std::vector<std::pair<std::string, abslab::MetricsTable>> runs;
    std::vector<abslab::RunSummary> summaries;
    for (const auto& dir : dirs) {
      abslab::MetricsTable table = abslab::read_metrics(std::filesystem::path(dir) / "metrics.csv");
      summaries.push_back(abslab::summarize(table, dir));
      runs.emplace_back(dir, std::move(table));
    }
    fmt::print("{}", abslab::summary_table(summaries));
    if (svg) {
      for (const auto& path : abslab::write_charts(runs, svg_dir)) fmt::print("wrote {}\n", path.string());
    }
  } catch (const abslab::IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return abslab::kExitIo;
  }
  return abslab::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive batch scaling lab for toy reinforcement learning"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "Run one training experiment");
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  train_cmd->add_option("--config", config_path, "key = value config file")->required();
  train_cmd->add_option("--mode", mode, "override the mode");
  train_cmd->add_option("--seed", seed, "override the seed");
  train_cmd->add_option("--out", out, "override the output directory");

  auto* compare_cmd = app.add_subcommand("compare", "Summarize finished runs");
  std::vector<std::string> dirs;
  bool svg = false;
  std::string svg_dir = "charts";
  compare_cmd->add_option("dirs", dirs, "run directories")->required();
  compare_cmd->add_flag("--svg", svg, "also write SVG charts");
  compare_cmd->add_option("--svg-dir", svg_dir, "where charts go (default: charts)");

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the fast oracle and property checks");
  std::string work_dir = "selftest_runs";
  selftest_cmd->add_option("--work-dir", work_dir, "scratch directory for short training runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : abslab::kExitConfig;
  }

  if (train_cmd->parsed()) return train(config_path, mode, seed, out);
  if (compare_cmd->parsed()) return compare(dirs, svg, svg_dir);
  const auto results = abslab::checks::run_criteria(abslab::checks::Scope::kFast, work_dir);
  for (const auto& r : results) fmt::print("{}\n", abslab::checks::format_result(r));
  for (const auto& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}
