#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abslab/env.hpp"

namespace abslab {

enum class Mode {
  kPqnFixed,
  kPqnAbs,
  kPqnGns,
  kPpoFixed,
  kPpoArs,
  kDqnReplayFixed,
  kDqnReplayAbs,
};

std::string_view mode_name(Mode mode);
// Throws ConfigError for unknown names.
Mode parse_mode(std::string_view name);

bool is_pqn(Mode mode);
bool is_ppo(Mode mode);
bool is_replay(Mode mode);
bool is_adaptive(Mode mode);

// Every knob of a training run. Defaults depend on the mode family and are
// installed by defaults_for(); a config file only lists deviations.
struct ExperimentConfig {
  Mode mode = Mode::kPqnAbs;
  std::string env = "chain";
  env::EnvParams env_params;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 300000;
  int num_envs = 128;

  // Rollout schedule (PQN, PPO).
  int l_min = 16;
  int l_max = 64;
  int l_base = 32;  // fixed-mode rollout and epoch-compensation baseline
  double delta_min = 0.05;
  double delta_max = 0.95;
  int adapt_every = 50;
  int window = 10;
  double ema_beta = 0.5;
  int ref_batch = 2048;
  bool epoch_compensation = true;
  std::string compensation_base = "baseline";  // or "l_min"

  // Optimization.
  int num_minibatches = 4;
  int update_epochs = 2;
  double gamma = 0.99;
  double q_lambda = 0.65;
  double gae_lambda = 0.95;
  double lr = 2.5e-4;
  bool anneal_lr = false;
  double eps_start = 1.0;
  double eps_end = 0.001;
  double eps_fraction = 0.10;
  double max_grad_norm = 10.0;
  std::vector<int> hidden_sizes{128, 128};

  // PPO.
  double clip_coef = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  bool clip_vloss = true;
  bool norm_adv = true;

  // Replay learner.
  int replay_capacity = 100000;
  int batch_size = 256;
  int b_min = 64;
  int b_max = 1024;
  int target_update = 500;

  // Run plumbing.
  std::string out_dir = "runs/latest";
  int threads = 1;
  bool wall_clock = false;
};

ExperimentConfig defaults_for(Mode mode);

struct ConfigOverrides {
  std::optional<Mode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

// Parses `key = value` text ('#' starts a comment). The mode comes from the
// overrides, else the text, else pqn-abs; its defaults fill omitted keys.
// Unknown keys, duplicates and invalid values raise ConfigError.
ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Throws ConfigError naming the offending key(s).
void validate(const ExperimentConfig& cfg);

// Rollout lengths handed to PPO must be multiples of this so that E*L
// splits into equal minibatches; 1 for the other families.
int rollout_granularity(const ExperimentConfig& cfg);

// Every effective key in parse_config_text format.
std::string resolved_text(const ExperimentConfig& cfg);

}  // namespace abslab
