#include "abslab/env.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab::env {

int EnvSpec::num_actions() const {
  require(discrete(), fmt::format("environment '{}' has a continuous action space", name));
  return std::get<DiscreteSpace>(action_space).n;
}

int EnvSpec::action_dim() const {
  require(!discrete(), fmt::format("environment '{}' has a discrete action space", name));
  return std::get<ContinuousSpace>(action_space).dim;
}

void validate(const EnvSpec& spec) {
  require(spec.obs_dim > 0, "obs_dim must be positive");
  require(spec.max_episode_len > 0, "max_episode_len must be positive");
  if (spec.discrete()) {
    require(spec.num_actions() >= 2, "discrete action space needs at least 2 actions");
  } else {
    const auto& box = std::get<ContinuousSpace>(spec.action_space);
    require(box.dim > 0, "continuous action dimension must be positive");
    require(box.low.size() == static_cast<std::size_t>(box.dim) &&
                box.high.size() == static_cast<std::size_t>(box.dim),
            "continuous bounds must match the action dimension");
    for (int d = 0; d < box.dim; ++d) {
      require(box.low[d] < box.high[d], "continuous bounds need low < high");
    }
  }
}

Outcome ToyEnv::step_discrete(int, Rng&) {
  throw ContractViolation("environment does not accept discrete actions");
}

Outcome ToyEnv::step_continuous(std::span<const double>, Rng&) {
  throw ContractViolation("environment does not accept continuous actions");
}

// ---------------------------------------------------------------- chain

void Chain::reset(Rng&) { state_ = 0; }

Outcome Chain::step_discrete(int action, Rng&) {
  if (action == kRight) {
    ++state_;
  } else {
    state_ = std::max(0, state_ - 1);
  }
  if (state_ == length_ - 1) return {1.0, true};
  return {0.0, false};
}

// One-hot. A scalar position would be mostly erased by the first layer norm.
void Chain::observe(std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[state_] = 1.0;
}

// ---------------------------------------------------------------- gridroom

void GridRoom::reset(Rng&) {
  x_ = 0;
  y_ = 0;
  slipped_ = false;
}

Outcome GridRoom::step_discrete(int action, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const double u = unit(rng);
  const bool side = coin(rng);
  int move = action;
  slipped_ = u < slip_prob_;
  if (slipped_) {
    const bool vertical = action == kUp || action == kDown;
    move = vertical ? (side ? kLeft : kRight) : (side ? kUp : kDown);
  }
  switch (move) {
    case kUp: y_ = std::min(size_ - 1, y_ + 1); break;
    case kDown: y_ = std::max(0, y_ - 1); break;
    case kLeft: x_ = std::max(0, x_ - 1); break;
    default: x_ = std::min(size_ - 1, x_ + 1); break;
  }
  if (x_ == size_ - 1 && y_ == size_ - 1) return {kGoalReward, true};
  return {kStepReward, false};
}

void GridRoom::observe(std::span<double> out) const {
  const double scale = 2.0 / (size_ - 1);
  out[0] = x_ * scale - 1.0;
  out[1] = y_ * scale - 1.0;
}

// ---------------------------------------------------------------- cartpole

CartPoleState cartpole_euler_step(const CartPoleState& s, double force) {
  constexpr double kGravity = 9.8;
  constexpr double kMassCart = 1.0;
  constexpr double kMassPole = 0.1;
  constexpr double kTotalMass = kMassCart + kMassPole;
  constexpr double kHalfLength = 0.5;
  constexpr double kPoleMassLength = kMassPole * kHalfLength;

  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + kPoleMassLength * s.theta_dot * s.theta_dot * sin_t) / kTotalMass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  CartPoleState next;
  next.x = s.x + CartPoleLite::kDt * s.x_dot;
  next.x_dot = s.x_dot + CartPoleLite::kDt * x_acc;
  next.theta = s.theta + CartPoleLite::kDt * s.theta_dot;
  next.theta_dot = s.theta_dot + CartPoleLite::kDt * theta_acc;
  return next;
}

void CartPoleLite::reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  state_.x = u(rng);
  state_.x_dot = u(rng);
  state_.theta = u(rng);
  state_.theta_dot = u(rng);
}

Outcome CartPoleLite::step_discrete(int action, Rng&) {
  state_ = cartpole_euler_step(state_, action == 1 ? kForce : -kForce);
  const bool fell = std::abs(state_.x) > kXLimit || std::abs(state_.theta) > kThetaLimit;
  return {1.0, fell};
}

void CartPoleLite::observe(std::span<double> out) const {
  out[0] = state_.x / kXLimit;
  out[1] = state_.x_dot / 3.0;
  out[2] = state_.theta / kThetaLimit;
  out[3] = state_.theta_dot / 3.5;
}

// ---------------------------------------------------------------- pointmass

void PointMass::reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  pos_[0] = u(rng);
  pos_[1] = u(rng);
  vel_[0] = 0.0;
  vel_[1] = 0.0;
}

void PointMass::place(double px, double py, double vx, double vy) {
  pos_[0] = px;
  pos_[1] = py;
  vel_[0] = vx;
  vel_[1] = vy;
}

Outcome PointMass::step_continuous(std::span<const double> action, Rng&) {
  for (int d = 0; d < 2; ++d) {
    const double force = std::clamp(action[d], -1.0, 1.0);
    vel_[d] += kDt * force;
    pos_[d] += kDt * vel_[d];
  }
  return {-std::hypot(pos_[0], pos_[1]), false};
}

void PointMass::observe(std::span<double> out) const {
  out[0] = pos_[0];
  out[1] = pos_[1];
  out[2] = vel_[0];
  out[3] = vel_[1];
}

// ---------------------------------------------------------------- batch

EnvBatch::EnvBatch(EnvSpec spec, std::vector<std::unique_ptr<ToyEnv>> envs, std::uint64_t seed)
    : spec_(std::move(spec)), envs_(std::move(envs)) {
  validate(spec_);
  require(!envs_.empty(), "an environment batch needs at least one environment");
  const int n = size();
  rngs_.reserve(n);
  for (int i = 0; i < n; ++i) rngs_.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
  step_counts_.assign(n, 0);
  running_return_.assign(n, 0.0);
  obs_.resize(n, spec_.obs_dim);
  for (int i = 0; i < n; ++i) {
    envs_[i]->reset(rngs_[i]);
    envs_[i]->observe(std::span<double>(obs_.row(i).data(), spec_.obs_dim));
  }
}

void EnvBatch::refresh_observations() {
  for (int i = 0; i < size(); ++i) {
    envs_[i]->observe(std::span<double>(obs_.row(i).data(), spec_.obs_dim));
  }
}

template <typename StepFn>
StepResult EnvBatch::step_impl(StepFn&& fn) {
  const int n = size();
  const int dim = spec_.obs_dim;
  StepResult out;
  out.obs.resize(n, dim);
  out.final_obs = Matrix::Zero(n, dim);
  out.reward.resize(n);
  out.done.assign(n, 0);
  out.truncated.assign(n, 0);
  out.episode_return = Vector::Zero(n);

  // Each index touches only its own env, RNG stream and output rows.
  auto advance = [&](int i) {
    const Outcome o = fn(i);
    ++step_counts_[i];
    running_return_[i] += o.reward;
    out.reward[i] = o.reward;
    const bool truncated = !o.terminated && step_counts_[i] >= spec_.max_episode_len;
    if (o.terminated || truncated) {
      envs_[i]->observe(std::span<double>(out.final_obs.row(i).data(), dim));
      out.done[i] = 1;
      out.truncated[i] = truncated ? 1 : 0;
      out.episode_return[i] = running_return_[i];
      running_return_[i] = 0.0;
      step_counts_[i] = 0;
      envs_[i]->reset(rngs_[i]);
    }
    envs_[i]->observe(std::span<double>(out.obs.row(i).data(), dim));
  };

  const int workers = std::min(threads_, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) advance(i);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers) advance(i);
      });
    }
  }
  obs_ = out.obs;
  return out;
}

StepResult EnvBatch::step(std::span<const int> actions) {
  require(spec_.discrete(), fmt::format("environment '{}' expects continuous actions", spec_.name));
  require(actions.size() == static_cast<std::size_t>(size()),
          fmt::format("expected {} actions, got {}", size(), actions.size()));
  const int n_actions = spec_.num_actions();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= n_actions) {
      throw ContractViolation(fmt::format("action {} for env {} is outside [0, {})", actions[i], i,
                                          n_actions));
    }
  }
  return step_impl([&](int i) { return envs_[i]->step_discrete(actions[i], rngs_[i]); });
}

StepResult EnvBatch::step(const Matrix& actions) {
  require(!spec_.discrete(), fmt::format("environment '{}' expects discrete actions", spec_.name));
  const auto& box = std::get<ContinuousSpace>(spec_.action_space);
  require(actions.rows() == size() && actions.cols() == box.dim,
          fmt::format("expected a {}x{} action matrix, got {}x{}", size(), box.dim, actions.rows(),
                      actions.cols()));
  Matrix clipped = actions;
  for (int i = 0; i < clipped.rows(); ++i) {
    for (int d = 0; d < box.dim; ++d) clipped(i, d) = std::clamp(clipped(i, d), box.low[d], box.high[d]);
  }
  return step_impl([&](int i) {
    return envs_[i]->step_continuous(std::span<const double>(clipped.row(i).data(), box.dim),
                                     rngs_[i]);
  });
}

EnvSpec spec_for(std::string_view name, const EnvParams& params) {
  EnvSpec spec;
  spec.name = std::string(name);
  if (name == "chain") {
    spec.obs_dim = params.chain_length;
    spec.action_space = DiscreteSpace{2};
    spec.max_episode_len = 60;
  } else if (name == "gridroom") {
    spec.obs_dim = 2;
    spec.action_space = DiscreteSpace{4};
    spec.max_episode_len = 200;
  } else if (name == "cartpole_lite") {
    spec.obs_dim = 4;
    spec.action_space = DiscreteSpace{2};
    spec.max_episode_len = 500;
  } else if (name == "pointmass") {
    spec.obs_dim = 4;
    spec.action_space = ContinuousSpace{2, {-1.0, -1.0}, {1.0, 1.0}};
    spec.max_episode_len = 100;
  } else {
    throw ConfigError(fmt::format(
        "unknown environment '{}' (expected chain, gridroom, cartpole_lite or pointmass)", name));
  }
  if (name == "chain" && params.chain_length < 2) {
    throw ConfigError("chain_length must be at least 2");
  }
  if (name == "gridroom") {
    if (params.grid_size < 2) throw ConfigError("grid_size must be at least 2");
    if (params.slip_prob < 0.0 || params.slip_prob > 1.0) {
      throw ConfigError("slip_prob must lie in [0, 1]");
    }
  }
  return spec;
}

EnvBatch make_env(std::string_view name, int num_envs, std::uint64_t seed, const EnvParams& params) {
  EnvSpec spec = spec_for(name, params);
  if (num_envs < 1) throw ConfigError("num_envs must be at least 1");
  std::vector<std::unique_ptr<ToyEnv>> envs;
  envs.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) {
    if (name == "chain") {
      envs.push_back(std::make_unique<Chain>(params.chain_length));
    } else if (name == "gridroom") {
      envs.push_back(std::make_unique<GridRoom>(params.grid_size, params.slip_prob));
    } else if (name == "cartpole_lite") {
      envs.push_back(std::make_unique<CartPoleLite>());
    } else {
      envs.push_back(std::make_unique<PointMass>());
    }
  }
  return EnvBatch(std::move(spec), std::move(envs), seed);
}

}  // namespace abslab::env
