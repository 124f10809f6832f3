#include "abslab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "abslab/error.hpp"
#include "abslab/returns.hpp"

namespace abslab::agents {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)
}

GaussianPolicy GaussianPolicy::initialize(int obs_dim, const std::vector<int>& hidden,
                                          int action_dim, Rng& rng) {
  GaussianPolicy p;
  p.mean = net::MlpParams::initialize(obs_dim, hidden, action_dim, rng);
  p.log_std = Vector::Zero(action_dim);
  return p;
}

Vector GaussianPolicy::clamped_log_std() const {
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         const Vector& log_std) {
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - mean[d]) * std::exp(-log_std[d]);
    lp += -0.5 * z * z - log_std[d] - kHalfLog2Pi;
  }
  return lp;
}

PpoAgent PpoAgent::initialize(int obs_dim, const std::vector<int>& hidden, int action_dim, Rng& rng) {
  PpoAgent agent;
  agent.policy = GaussianPolicy::initialize(obs_dim, hidden, action_dim, rng);
  agent.value = net::MlpParams::initialize(obs_dim, hidden, 1, rng);
  return agent;
}

Eigen::Index PpoAgent::packed_size() const {
  return static_cast<Eigen::Index>(policy.mean.size()) + policy.log_std.size() +
         static_cast<Eigen::Index>(value.size());
}

Vector PpoAgent::pack() const {
  Vector flat(packed_size());
  flat << policy.mean.flatten(), policy.log_std, value.flatten();
  return flat;
}

void PpoAgent::unpack(const Vector& flat) {
  require(flat.size() == packed_size(), "packed PPO parameter size mismatch");
  const auto nm = static_cast<Eigen::Index>(policy.mean.size());
  const auto ns = policy.log_std.size();
  policy.mean.unflatten(flat.head(nm));
  policy.log_std = flat.segment(nm, ns).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  value.unflatten(flat.tail(static_cast<Eigen::Index>(value.size())));
}

RolloutBuffer collect_gaussian_rollout(const PpoAgent& agent, env::EnvBatch& env, int steps, Rng& rng) {
  require(steps >= 1, "rollout length must be at least 1");
  const int n = env.size();
  const int dim = env.spec().obs_dim;
  const int adim = env.spec().action_dim();
  require(agent.policy.mean.input_dim() == dim && agent.policy.action_dim() == adim,
          "policy shape does not match the environment");

  RolloutBuffer buf;
  buf.steps = steps;
  buf.envs = n;
  const auto rows = static_cast<Eigen::Index>(steps) * n;
  buf.obs.resize(rows + n, dim);
  buf.values.resize(rows + n);
  buf.continuous_actions.resize(rows, adim);
  buf.logprob.resize(rows);
  buf.rewards.resize(rows);
  buf.done.resize(static_cast<std::size_t>(rows));
  buf.truncated.resize(static_cast<std::size_t>(rows));
  buf.truncation_bootstrap = Vector::Zero(rows);

  const Vector log_std = agent.policy.clamped_log_std();
  const Vector std_dev = log_std.array().exp();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix actions(n, adim);
  for (int t = 0; t < steps; ++t) {
    const Matrix& obs = env.observations();
    const Matrix mu = net::forward(agent.policy.mean, obs);
    const Matrix v = net::forward(agent.value, obs);
    const auto base = static_cast<Eigen::Index>(t) * n;
    buf.obs.middleRows(base, n) = obs;
    buf.values.segment(base, n) = v.col(0);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < adim; ++d) actions(i, d) = mu(i, d) + std_dev[d] * normal(rng);
      buf.logprob[base + i] = gaussian_log_prob(std::span<const double>(actions.row(i).data(), adim),
                                                std::span<const double>(mu.row(i).data(), adim), log_std);
    }
    buf.continuous_actions.middleRows(base, n) = actions;
    const env::StepResult res = env.step(actions);
    for (int i = 0; i < n; ++i) {
      const int r = buf.row(t, i);
      buf.rewards[r] = res.reward[i];
      buf.done[r] = res.done[i];
      buf.truncated[r] = res.truncated[i];
      if (res.done[i]) buf.finished_returns.push_back(res.episode_return[i]);
      if (res.truncated[i]) {
        const Matrix final_obs = res.final_obs.row(i);
        buf.truncation_bootstrap[r] = net::forward(agent.value, final_obs)(0, 0);
      }
    }
  }
  const Matrix& last = env.observations();
  buf.obs.bottomRows(n) = last;
  buf.values.tail(n) = net::forward(agent.value, last).col(0);
  return buf;
}

double clipped_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate_grad(double ratio, double advantage, double clip) {
  const bool inside = ratio >= 1.0 - clip && ratio <= 1.0 + clip;
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  if (inside || ratio * advantage < clipped * advantage) return ratio * advantage;
  return 0.0;
}

PpoStats ppo_update(PpoAgent& agent, net::AdamState& opt, const RolloutBuffer& buf,
                    const PpoSettings& settings, Rng& shuffle_rng) {
  const int total = buf.size();
  require(total % settings.minibatches == 0,
          fmt::format("{} transitions do not split into {} minibatches", total, settings.minibatches));
  require(buf.logprob.size() == total, "PPO needs log-probs cached at collection");

  const GaeResult est = gae(buf, settings.gamma, settings.gae_lambda);
  const Vector adv = settings.normalize_advantages ? normalize_advantages(est.advantages) : est.advantages;
  const Vector& returns = est.value_targets;
  const Matrix obs = buf.transition_obs();
  const int adim = agent.policy.action_dim();
  const int mb_size = total / settings.minibatches;

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);

  PpoStats stats;
  double clipped_count = 0.0;
  Matrix mb_obs(mb_size, obs.cols());
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int mb = 0; mb < settings.minibatches; ++mb) {
      for (int k = 0; k < mb_size; ++k) mb_obs.row(k) = obs.row(order[mb * mb_size + k]);

      const Vector log_std = agent.policy.clamped_log_std();
      const Vector inv_var = (-2.0 * log_std).array().exp();
      net::ForwardCache mean_cache, value_cache;
      const Matrix mu = net::forward(agent.policy.mean, mb_obs, mean_cache);
      const Matrix v = net::forward(agent.value, mb_obs, value_cache);

      Matrix d_mean = Matrix::Zero(mb_size, adim);
      Vector d_log_std = Vector::Zero(adim);
      Matrix d_value = Matrix::Zero(mb_size, 1);
      double pg_loss = 0.0;
      double v_loss = 0.0;
      const double inv_n = 1.0 / mb_size;
      for (int k = 0; k < mb_size; ++k) {
        const int idx = order[mb * mb_size + k];
        const auto a = buf.continuous_actions.row(idx);
        const double lp = gaussian_log_prob(std::span<const double>(a.data(), adim),
                                            std::span<const double>(mu.row(k).data(), adim), log_std);
        const double ratio = std::exp(lp - buf.logprob[idx]);
        if (epoch == 0 && mb == 0) {
          stats.initial_ratio_deviation = std::max(stats.initial_ratio_deviation, std::abs(ratio - 1.0));
        }
        if (std::abs(ratio - 1.0) > settings.clip) clipped_count += 1.0;
        pg_loss -= clipped_surrogate(ratio, adv[idx], settings.clip) * inv_n;
        // d loss / d log pi for this sample.
        const double g = -clipped_surrogate_grad(ratio, adv[idx], settings.clip) * inv_n;
        for (int d = 0; d < adim; ++d) {
          const double diff = a[d] - mu(k, d);
          d_mean(k, d) = g * diff * inv_var[d];
          d_log_std[d] += g * (diff * diff * inv_var[d] - 1.0);
        }

        const double value = v(k, 0);
        const double err = value - returns[idx];
        if (settings.clip_value_loss) {
          const double old = buf.values[idx];
          const double delta = value - old;
          const double clipped_value = old + std::clamp(delta, -settings.clip, settings.clip);
          const double err_clipped = clipped_value - returns[idx];
          if (err * err >= err_clipped * err_clipped) {
            v_loss += 0.5 * err * err * inv_n;
            d_value(k, 0) = settings.vf_coef * err * inv_n;
          } else {
            v_loss += 0.5 * err_clipped * err_clipped * inv_n;
            const bool passes = std::abs(delta) < settings.clip;
            d_value(k, 0) = passes ? settings.vf_coef * err_clipped * inv_n : 0.0;
          }
        } else {
          v_loss += 0.5 * err * err * inv_n;
          d_value(k, 0) = settings.vf_coef * err * inv_n;
        }
      }
      const double entropy = log_std.sum() + adim * (0.5 + kHalfLog2Pi);
      d_log_std.array() -= settings.ent_coef;

      const double loss = pg_loss + settings.vf_coef * v_loss - settings.ent_coef * entropy;
      if (!std::isfinite(loss)) throw TrainingDivergence("non-finite PPO loss");

      Vector grad(agent.packed_size());
      grad << net::backward(agent.policy.mean, mean_cache, d_mean), d_log_std,
          net::backward(agent.value, value_cache, d_value);
      net::check_finite(grad, "PPO gradient");
      Vector params = agent.pack();
      net::adam_step(params, opt, net::clip_global_norm(grad, settings.max_grad_norm), settings.lr);
      agent.unpack(params);

      stats.policy_loss += pg_loss;
      stats.value_loss += v_loss;
      stats.entropy += entropy;
      ++stats.optimizer_steps;
    }
  }
  const double steps = stats.optimizer_steps;
  stats.policy_loss /= steps;
  stats.value_loss /= steps;
  stats.entropy /= steps;
  stats.clip_fraction = clipped_count / (steps * mb_size);
  return stats;
}

}  // namespace abslab::agents
