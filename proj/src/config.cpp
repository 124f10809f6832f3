#include "abslab/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "abslab/error.hpp"

namespace abslab {

namespace {

constexpr std::pair<Mode, std::string_view> kModeNames[] = {
    {Mode::kPqnFixed, "pqn-fixed"},           {Mode::kPqnAbs, "pqn-abs"},
    {Mode::kPqnGns, "pqn-gns"},               {Mode::kPpoFixed, "ppo-fixed"},
    {Mode::kPpoArs, "ppo-ars"},               {Mode::kDqnReplayFixed, "dqn-replay-fixed"},
    {Mode::kDqnReplayAbs, "dqn-replay-abs"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(fmt::format("key '{}': cannot parse '{}' as {}", key, value, expected));
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  // strtod accepts the shortest round-trip output of fmt; from_chars for
  // doubles is missing from older standard libraries.
  const std::string copy(value);
  char* end = nullptr;
  const double out = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) bad_value(key, value, "a number");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "a boolean");
}

std::vector<int> to_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos ? comma : comma - start));
    out.push_back(to_int<int>(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Key {
  std::string_view name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string num(double v) { return fmt::format("{}", v); }
std::string flag(bool v) { return v ? "true" : "false"; }

#define ABSLAB_INT_KEY(field, type)                                                        \
  Key {                                                                                    \
    #field, [](ExperimentConfig& c, std::string_view v) { c.field = to_int<type>(#field, v); }, \
        [](const ExperimentConfig& c) { return fmt::format("{}", c.field); }               \
  }
#define ABSLAB_DOUBLE_KEY(field)                                                          \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, std::string_view v) { c.field = to_double(#field, v); }, \
        [](const ExperimentConfig& c) { return num(c.field); }                            \
  }
#define ABSLAB_BOOL_KEY(field)                                                          \
  Key {                                                                                 \
    #field, [](ExperimentConfig& c, std::string_view v) { c.field = to_bool(#field, v); }, \
        [](const ExperimentConfig& c) { return flag(c.field); }                         \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"mode", [](ExperimentConfig& c, std::string_view v) { c.mode = parse_mode(v); },
       [](const ExperimentConfig& c) { return std::string(mode_name(c.mode)); }},
      {"env", [](ExperimentConfig& c, std::string_view v) { c.env = std::string(v); },
       [](const ExperimentConfig& c) { return c.env; }},
      {"chain_length",
       [](ExperimentConfig& c, std::string_view v) { c.env_params.chain_length = to_int<int>("chain_length", v); },
       [](const ExperimentConfig& c) { return fmt::format("{}", c.env_params.chain_length); }},
      {"grid_size",
       [](ExperimentConfig& c, std::string_view v) { c.env_params.grid_size = to_int<int>("grid_size", v); },
       [](const ExperimentConfig& c) { return fmt::format("{}", c.env_params.grid_size); }},
      {"slip_prob",
       [](ExperimentConfig& c, std::string_view v) { c.env_params.slip_prob = to_double("slip_prob", v); },
       [](const ExperimentConfig& c) { return num(c.env_params.slip_prob); }},
      ABSLAB_INT_KEY(seed, std::uint64_t),
      ABSLAB_INT_KEY(total_steps, std::int64_t),
      ABSLAB_INT_KEY(num_envs, int),
      ABSLAB_INT_KEY(l_min, int),
      ABSLAB_INT_KEY(l_max, int),
      ABSLAB_INT_KEY(l_base, int),
      ABSLAB_DOUBLE_KEY(delta_min),
      ABSLAB_DOUBLE_KEY(delta_max),
      ABSLAB_INT_KEY(adapt_every, int),
      ABSLAB_INT_KEY(window, int),
      ABSLAB_DOUBLE_KEY(ema_beta),
      ABSLAB_INT_KEY(ref_batch, int),
      ABSLAB_BOOL_KEY(epoch_compensation),
      {"compensation_base",
       [](ExperimentConfig& c, std::string_view v) { c.compensation_base = std::string(v); },
       [](const ExperimentConfig& c) { return c.compensation_base; }},
      ABSLAB_INT_KEY(num_minibatches, int),
      ABSLAB_INT_KEY(update_epochs, int),
      ABSLAB_DOUBLE_KEY(gamma),
      ABSLAB_DOUBLE_KEY(q_lambda),
      ABSLAB_DOUBLE_KEY(gae_lambda),
      ABSLAB_DOUBLE_KEY(lr),
      ABSLAB_BOOL_KEY(anneal_lr),
      ABSLAB_DOUBLE_KEY(eps_start),
      ABSLAB_DOUBLE_KEY(eps_end),
      ABSLAB_DOUBLE_KEY(eps_fraction),
      ABSLAB_DOUBLE_KEY(max_grad_norm),
      {"hidden_sizes",
       [](ExperimentConfig& c, std::string_view v) { c.hidden_sizes = to_int_list("hidden_sizes", v); },
       [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.hidden_sizes, ",")); }},
      ABSLAB_DOUBLE_KEY(clip_coef),
      ABSLAB_DOUBLE_KEY(vf_coef),
      ABSLAB_DOUBLE_KEY(ent_coef),
      ABSLAB_BOOL_KEY(clip_vloss),
      ABSLAB_BOOL_KEY(norm_adv),
      ABSLAB_INT_KEY(replay_capacity, int),
      ABSLAB_INT_KEY(batch_size, int),
      ABSLAB_INT_KEY(b_min, int),
      ABSLAB_INT_KEY(b_max, int),
      ABSLAB_INT_KEY(target_update, int),
      {"out_dir", [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(v); },
       [](const ExperimentConfig& c) { return c.out_dir; }},
      ABSLAB_INT_KEY(threads, int),
      ABSLAB_BOOL_KEY(wall_clock),
  };
  return table;
}

#undef ABSLAB_INT_KEY
#undef ABSLAB_DOUBLE_KEY
#undef ABSLAB_BOOL_KEY

const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string_view mode_name(Mode mode) {
  for (const auto& [m, name] : kModeNames) {
    if (m == mode) return name;
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames) {
    if (n == name) return m;
  }
  throw ConfigError(fmt::format(
      "key 'mode': unknown mode '{}' (expected pqn-fixed, pqn-abs, pqn-gns, ppo-fixed, ppo-ars, "
      "dqn-replay-fixed or dqn-replay-abs)",
      name));
}

bool is_pqn(Mode m) { return m == Mode::kPqnFixed || m == Mode::kPqnAbs || m == Mode::kPqnGns; }
bool is_ppo(Mode m) { return m == Mode::kPpoFixed || m == Mode::kPpoArs; }
bool is_replay(Mode m) { return m == Mode::kDqnReplayFixed || m == Mode::kDqnReplayAbs; }
bool is_adaptive(Mode m) {
  return m == Mode::kPqnAbs || m == Mode::kPqnGns || m == Mode::kPpoArs || m == Mode::kDqnReplayAbs;
}

ExperimentConfig defaults_for(Mode mode) {
  ExperimentConfig c;  // PQN table values
  c.mode = mode;
  if (is_ppo(mode)) {
    c.env = "pointmass";
    c.num_envs = 1;
    c.l_min = 1024;
    c.l_max = 8192;
    c.l_base = 2048;
    c.delta_min = 0.01;
    c.delta_max = 0.1;
    c.adapt_every = 10;
    c.num_minibatches = 32;
    c.update_epochs = 10;
    c.epoch_compensation = false;
    c.gamma = 0.99;
    c.gae_lambda = 0.95;
    c.lr = 3e-4;
    c.anneal_lr = true;
    c.max_grad_norm = 0.5;
  } else if (is_replay(mode)) {
    c.env = "gridroom";
    c.num_envs = 64;
    c.gamma = 0.997;
    c.lr = 1e-4;
    c.max_grad_norm = 10.0;
    c.epoch_compensation = false;
  }
  return c;
}

ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides) {
  std::map<std::string, std::pair<std::string, int>, std::less<>> entries;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      check(eq != std::string_view::npos,
            fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      check(find_key(key) != nullptr, fmt::format("line {}: unknown key '{}'", line_no, key));
      check(!value.empty(), fmt::format("line {}: key '{}' has no value", line_no, key));
      check(!entries.contains(key), fmt::format("line {}: duplicate key '{}'", line_no, key));
      entries.emplace(key, std::make_pair(value, line_no));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }

  Mode mode = Mode::kPqnAbs;
  if (overrides.mode) {
    mode = *overrides.mode;
  } else if (auto it = entries.find("mode"); it != entries.end()) {
    mode = parse_mode(it->second.first);
  }
  ExperimentConfig cfg = defaults_for(mode);
  for (const auto& [key, entry] : entries) {
    if (key == "mode") continue;
    find_key(key)->set(cfg, entry.first);
  }
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

int rollout_granularity(const ExperimentConfig& cfg) {
  if (!is_ppo(cfg.mode) || cfg.num_minibatches < 1 || cfg.num_envs < 1) return 1;
  return cfg.num_minibatches / std::gcd(cfg.num_envs, cfg.num_minibatches);
}

void validate(const ExperimentConfig& c) {
  const env::EnvSpec spec = env::spec_for(c.env, c.env_params);
  if (is_ppo(c.mode)) {
    check(!spec.discrete(), fmt::format("key 'env': mode {} needs a continuous-action environment, '{}' is discrete",
                                        mode_name(c.mode), c.env));
  } else {
    check(spec.discrete(), fmt::format("key 'env': mode {} needs a discrete-action environment, '{}' is continuous",
                                       mode_name(c.mode), c.env));
  }
  check(c.total_steps >= 1, "key 'total_steps' must be at least 1");
  check(c.num_envs >= 1, "key 'num_envs' must be at least 1");
  check(c.l_min >= 1, "key 'l_min' must be at least 1");
  check(c.l_min <= c.l_max,
        fmt::format("keys 'l_min' ({}) and 'l_max' ({}) are out of order: need l_min <= l_max", c.l_min, c.l_max));
  check(c.l_base >= 1, "key 'l_base' must be at least 1");
  check(c.delta_min > 0.0 && c.delta_min < 1.0, "key 'delta_min' must lie in (0, 1)");
  check(c.delta_max > 0.0 && c.delta_max < 1.0, "key 'delta_max' must lie in (0, 1)");
  check(c.delta_min < c.delta_max,
        fmt::format("keys 'delta_min' ({}) and 'delta_max' ({}) are out of order: need delta_min < delta_max",
                    c.delta_min, c.delta_max));
  check(c.adapt_every >= 1, "key 'adapt_every' must be at least 1");
  check(c.window >= 1, "key 'window' must be at least 1");
  check(c.ema_beta > 0.0 && c.ema_beta <= 1.0, "key 'ema_beta' must lie in (0, 1]");
  check(c.ref_batch >= 1, "key 'ref_batch' must be at least 1");
  check(c.compensation_base == "baseline" || c.compensation_base == "l_min",
        "key 'compensation_base' must be 'baseline' or 'l_min'");
  check(c.num_minibatches >= 1, "key 'num_minibatches' must be at least 1");
  check(c.update_epochs >= 1, "key 'update_epochs' must be at least 1");
  check(c.gamma >= 0.0 && c.gamma < 1.0, "key 'gamma' must lie in [0, 1)");
  check(c.q_lambda >= 0.0 && c.q_lambda <= 1.0, "key 'q_lambda' must lie in [0, 1]");
  check(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0, "key 'gae_lambda' must lie in [0, 1]");
  check(c.lr > 0.0, "key 'lr' must be positive");
  check(c.eps_start >= 0.0 && c.eps_start <= 1.0, "key 'eps_start' must lie in [0, 1]");
  check(c.eps_end >= 0.0 && c.eps_end <= 1.0, "key 'eps_end' must lie in [0, 1]");
  check(c.eps_fraction > 0.0 && c.eps_fraction <= 1.0, "key 'eps_fraction' must lie in (0, 1]");
  check(c.max_grad_norm > 0.0, "key 'max_grad_norm' must be positive");
  check(!c.hidden_sizes.empty(), "key 'hidden_sizes' needs at least one layer");
  for (int h : c.hidden_sizes) check(h >= 1, "key 'hidden_sizes' entries must be positive");
  check(c.clip_coef > 0.0, "key 'clip_coef' must be positive");
  check(c.vf_coef >= 0.0, "key 'vf_coef' must be non-negative");
  check(c.ent_coef >= 0.0, "key 'ent_coef' must be non-negative");
  check(c.replay_capacity >= 1, "key 'replay_capacity' must be at least 1");
  check(c.batch_size >= 1, "key 'batch_size' must be at least 1");
  check(c.b_min >= 1, "key 'b_min' must be at least 1");
  check(c.b_min <= c.b_max,
        fmt::format("keys 'b_min' ({}) and 'b_max' ({}) are out of order: need b_min <= b_max", c.b_min, c.b_max));
  check(c.target_update >= 1, "key 'target_update' must be at least 1");
  check(c.threads >= 1, "key 'threads' must be at least 1");
  check(!c.out_dir.empty(), "key 'out_dir' must not be empty");

  if (is_pqn(c.mode)) {
    check(c.num_envs % c.num_minibatches == 0,
          fmt::format("keys 'num_envs' ({}) and 'num_minibatches' ({}): num_envs must be a multiple of "
                      "num_minibatches",
                      c.num_envs, c.num_minibatches));
  }
  if (is_ppo(c.mode)) {
    const int g = rollout_granularity(c);
    const bool fixed = c.mode == Mode::kPpoFixed;
    const bool ok = fixed ? c.l_base % g == 0 : (c.l_min % g == 0 && c.l_max % g == 0);
    check(ok, fmt::format("keys 'num_envs' ({}) and 'num_minibatches' ({}): rollout lengths must be "
                          "multiples of {} so every batch splits into equal minibatches",
                          c.num_envs, c.num_minibatches, g));
  }
  if (is_replay(c.mode)) {
    const int largest = c.mode == Mode::kDqnReplayAbs ? c.b_max : c.batch_size;
    check(largest <= c.replay_capacity,
          fmt::format("key 'replay_capacity' ({}) must hold at least one batch ({})", c.replay_capacity, largest));
  }
}

std::string resolved_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  return out;
}

}  // namespace abslab
