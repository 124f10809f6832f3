#include "abslab/rollout.hpp"

#include <algorithm>

#include "abslab/error.hpp"

namespace abslab::agents {

double epsilon_at(std::int64_t t, std::int64_t total, const EpsilonSchedule& schedule) {
  require(total > 0, "total steps must be positive");
  const double horizon = schedule.fraction * static_cast<double>(total);
  const double progress = horizon > 0.0 ? std::min(1.0, static_cast<double>(std::max<std::int64_t>(t, 0)) / horizon) : 1.0;
  if (progress >= 1.0) return schedule.end;
  return schedule.start + progress * (schedule.end - schedule.start);
}

int argmax_lowest(std::span<const double> row) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(row.size()); ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

std::vector<int> greedy_actions(const Matrix& q) {
  std::vector<int> out(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    out[r] = argmax_lowest(std::span<const double>(q.row(r).data(), q.cols()));
  }
  return out;
}

int epsilon_greedy(std::span<const double> q_row, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q_row.size()) - 1);
    return pick(rng);
  }
  return argmax_lowest(q_row);
}

RolloutBuffer collect_q_rollout(const net::MlpParams& params, env::EnvBatch& env, int steps,
                                double epsilon, Rng& rng) {
  require(steps >= 1, "rollout length must be at least 1");
  const int n = env.size();
  const int dim = env.spec().obs_dim;
  const int n_actions = env.spec().num_actions();
  require(params.input_dim() == dim && params.output_dim() == n_actions,
          "Q network shape does not match the environment");

  RolloutBuffer buf;
  buf.steps = steps;
  buf.envs = n;
  buf.obs.resize(static_cast<Eigen::Index>(steps + 1) * n, dim);
  buf.q_values.resize(static_cast<Eigen::Index>(steps + 1) * n, n_actions);
  buf.actions.resize(static_cast<std::size_t>(steps) * n);
  buf.rewards.resize(static_cast<Eigen::Index>(steps) * n);
  buf.done.resize(static_cast<std::size_t>(steps) * n);
  buf.truncated.resize(static_cast<std::size_t>(steps) * n);
  buf.truncation_bootstrap = Vector::Zero(static_cast<Eigen::Index>(steps) * n);

  std::vector<int> actions(n);
  for (int t = 0; t < steps; ++t) {
    const Matrix& obs = env.observations();
    const Matrix q = net::forward(params, obs);
    buf.obs.middleRows(static_cast<Eigen::Index>(t) * n, n) = obs;
    buf.q_values.middleRows(static_cast<Eigen::Index>(t) * n, n) = q;
    for (int i = 0; i < n; ++i) {
      actions[i] = epsilon_greedy(std::span<const double>(q.row(i).data(), n_actions), epsilon, rng);
    }
    const env::StepResult res = env.step(actions);

    std::vector<Eigen::Index> cut;
    for (int i = 0; i < n; ++i) {
      const int r = buf.row(t, i);
      buf.actions[r] = actions[i];
      buf.rewards[r] = res.reward[i];
      buf.done[r] = res.done[i];
      buf.truncated[r] = res.truncated[i];
      if (res.done[i]) buf.finished_returns.push_back(res.episode_return[i]);
      if (res.truncated[i]) cut.push_back(i);
    }
    if (!cut.empty()) {
      Matrix final_obs(static_cast<Eigen::Index>(cut.size()), dim);
      for (std::size_t k = 0; k < cut.size(); ++k) final_obs.row(k) = res.final_obs.row(cut[k]);
      const Matrix q_final = net::forward(params, final_obs);
      for (std::size_t k = 0; k < cut.size(); ++k) {
        buf.truncation_bootstrap[buf.row(t, static_cast<int>(cut[k]))] = q_final.row(k).maxCoeff();
      }
    }
  }
  const Matrix& last = env.observations();
  buf.obs.bottomRows(n) = last;
  buf.q_values.bottomRows(n) = net::forward(params, last);
  return buf;
}

}  // namespace abslab::agents
