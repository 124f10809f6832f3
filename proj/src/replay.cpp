#include "abslab/replay.hpp"

#include <fmt/format.h>

#include "abslab/error.hpp"
#include "abslab/pqn.hpp"
#include "abslab/rollout.hpp"

namespace abslab::agents {

ReplayBuffer::ReplayBuffer(int capacity, int obs_dim)
    : capacity_(capacity),
      obs_(Matrix::Zero(capacity, obs_dim)),
      next_obs_(Matrix::Zero(capacity, obs_dim)),
      actions_(static_cast<std::size_t>(capacity), 0),
      rewards_(Vector::Zero(capacity)),
      terminal_(static_cast<std::size_t>(capacity), 0) {
  require(capacity > 0, "replay capacity must be positive");
}

void ReplayBuffer::push(const Eigen::Ref<const Vector>& obs, int action, double reward,
                        const Eigen::Ref<const Vector>& next_obs, bool terminal) {
  obs_.row(cursor_) = obs.transpose();
  next_obs_.row(cursor_) = next_obs.transpose();
  actions_[cursor_] = action;
  rewards_[cursor_] = reward;
  terminal_[cursor_] = terminal ? 1 : 0;
  cursor_ = (cursor_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::vector<int> ReplayBuffer::sample_indices(int count, Rng& rng) const {
  require(size_ > 0, "cannot sample from an empty replay buffer");
  std::uniform_int_distribution<int> pick(0, size_ - 1);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int& slot : out) slot = pick(rng);
  return out;
}

DqnLearner DqnLearner::initialize(int obs_dim, const std::vector<int>& hidden, int n_actions, Rng& rng) {
  DqnLearner learner;
  learner.online = net::MlpParams::initialize(obs_dim, hidden, n_actions, rng);
  learner.target = learner.online;
  learner.opt = net::AdamState(static_cast<Eigen::Index>(learner.online.size()));
  return learner;
}

Vector dqn_targets(const net::MlpParams& target, const ReplayBuffer& rb, std::span<const int> slots,
                   double gamma) {
  const auto n = static_cast<Eigen::Index>(slots.size());
  Matrix next(n, rb.next_obs().cols());
  for (Eigen::Index k = 0; k < n; ++k) next.row(k) = rb.next_obs().row(slots[k]);
  const Matrix q_next = net::forward(target, next);
  Vector y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int s = slots[k];
    y[k] = rb.reward(s) + (rb.terminal(s) ? 0.0 : gamma * q_next.row(k).maxCoeff());
  }
  return y;
}

std::optional<double> replay_dqn_update(DqnLearner& learner, const ReplayBuffer& rb, int batch,
                                        const ReplayUpdateSettings& settings, Rng& rng) {
  require(batch >= 1, "replay batch size must be positive");
  if (rb.size() < batch) return std::nullopt;
  const std::vector<int> slots = rb.sample_indices(batch, rng);
  Matrix obs(batch, rb.obs().cols());
  std::vector<int> actions(static_cast<std::size_t>(batch));
  for (int k = 0; k < batch; ++k) {
    obs.row(k) = rb.obs().row(slots[k]);
    actions[k] = rb.action(slots[k]);
  }
  const Vector y = dqn_targets(learner.target, rb, slots, settings.gamma);
  RegressionLoss step = q_regression_loss(learner.online, obs, actions, y);
  net::adam_step(learner.online.values(), learner.opt,
                 net::clip_global_norm(step.gradient, settings.max_grad_norm), settings.lr);
  ++learner.gradient_steps;
  if (learner.gradient_steps % learner.target_update == 0) learner.target = learner.online;
  return step.loss;
}

std::vector<double> step_into_replay(const net::MlpParams& online, env::EnvBatch& env, double epsilon,
                                     ReplayBuffer& rb, Rng& rng) {
  const int n = env.size();
  const int n_actions = env.spec().num_actions();
  const Matrix obs = env.observations();
  const Matrix q = net::forward(online, obs);
  std::vector<int> actions(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    actions[i] = epsilon_greedy(std::span<const double>(q.row(i).data(), n_actions), epsilon, rng);
  }
  const env::StepResult res = env.step(actions);
  std::vector<double> finished;
  for (int i = 0; i < n; ++i) {
    const bool done = res.done[i] != 0;
    const bool terminal = done && !res.truncated[i];
    if (done) finished.push_back(res.episode_return[i]);
    rb.push(obs.row(i).transpose(), actions[i], res.reward[i],
            done ? Vector(res.final_obs.row(i).transpose()) : Vector(res.obs.row(i).transpose()), terminal);
  }
  return finished;
}

}  // namespace abslab::agents
