#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "abslab/adam.hpp"
#include "abslab/env.hpp"
#include "abslab/mlp.hpp"

namespace abslab::agents {

// Fixed-capacity ring of transitions with FIFO overwrite.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, int obs_dim);

  void push(const Eigen::Ref<const Vector>& obs, int action, double reward,
            const Eigen::Ref<const Vector>& next_obs, bool terminal);

  int capacity() const { return capacity_; }
  int size() const { return size_; }
  int cursor() const { return cursor_; }

  // `count` slot indices drawn uniformly with replacement from [0, size).
  std::vector<int> sample_indices(int count, Rng& rng) const;

  const Matrix& obs() const { return obs_; }
  const Matrix& next_obs() const { return next_obs_; }
  int action(int slot) const { return actions_[slot]; }
  double reward(int slot) const { return rewards_[slot]; }
  bool terminal(int slot) const { return terminal_[slot] != 0; }

 private:
  int capacity_;
  int size_ = 0;
  int cursor_ = 0;
  Matrix obs_;
  Matrix next_obs_;
  std::vector<int> actions_;
  Vector rewards_;
  std::vector<std::uint8_t> terminal_;
};

// Online/target Q pair with a hard target copy every `target_update` steps.
struct DqnLearner {
  net::MlpParams online;
  net::MlpParams target;
  net::AdamState opt;
  std::int64_t gradient_steps = 0;
  int target_update = 500;

  static DqnLearner initialize(int obs_dim, const std::vector<int>& hidden, int n_actions, Rng& rng);
};

struct ReplayUpdateSettings {
  double gamma = 0.997;
  double lr = 1e-4;
  double max_grad_norm = 10.0;
};

// r + gamma * (1 - terminal) * max_a Q_target(s', a) for the given slots.
Vector dqn_targets(const net::MlpParams& target, const ReplayBuffer& rb, std::span<const int> slots,
                   double gamma);

// One gradient step on `batch` uniformly sampled transitions. Returns the
// mean squared TD error, or nullopt (skip, nothing changed) when the buffer
// holds fewer than `batch` transitions.
std::optional<double> replay_dqn_update(DqnLearner& learner, const ReplayBuffer& rb, int batch,
                                        const ReplayUpdateSettings& settings, Rng& rng);

// One epsilon-greedy lockstep step of every env, pushing E transitions.
// Truncated episodes store their pre-reset observation as s' and stay
// bootstrappable. Returns the returns of episodes that finished.
std::vector<double> step_into_replay(const net::MlpParams& online, env::EnvBatch& env, double epsilon,
                                     ReplayBuffer& rb, Rng& rng);

}  // namespace abslab::agents
