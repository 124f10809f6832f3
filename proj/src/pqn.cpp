#include "abslab/pqn.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab::agents {

RegressionLoss q_regression_loss(const net::MlpParams& params, const Matrix& obs,
                                 std::span<const int> actions, const Vector& targets) {
  const Eigen::Index n = obs.rows();
  require(n > 0 && actions.size() == static_cast<std::size_t>(n) && targets.size() == n,
          "regression batch sizes disagree");
  net::ForwardCache cache;
  const Matrix q = net::forward(params, obs, cache);
  Matrix upstream = Matrix::Zero(n, q.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double err = q(r, actions[r]) - targets[r];
    loss += err * err;
    upstream(r, actions[r]) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw TrainingDivergence("non-finite Q regression loss");
  return {loss, net::backward(params, cache, upstream)};
}

PqnUpdateStats pqn_update(net::MlpParams& params, net::AdamState& opt, const RolloutBuffer& buf,
                          const PqnUpdateSettings& settings, Rng& shuffle_rng) {
  const int total = buf.size();
  require(settings.minibatches >= 1 && settings.epochs >= 1, "need at least one minibatch and epoch");
  require(total % settings.minibatches == 0,
          fmt::format("{} transitions do not split into {} minibatches", total, settings.minibatches));
  require(buf.targets.size() == total, "rollout targets have not been computed");

  const int mb_size = total / settings.minibatches;
  const Matrix obs = buf.transition_obs();
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);

  PqnUpdateStats stats;
  Matrix mb_obs(mb_size, obs.cols());
  std::vector<int> mb_actions(mb_size);
  Vector mb_targets(mb_size);
  double loss_sum = 0.0;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int mb = 0; mb < settings.minibatches; ++mb) {
      for (int k = 0; k < mb_size; ++k) {
        const int idx = order[mb * mb_size + k];
        mb_obs.row(k) = obs.row(idx);
        mb_actions[k] = buf.actions[idx];
        mb_targets[k] = buf.targets[idx];
      }
      RegressionLoss step = q_regression_loss(params, mb_obs, mb_actions, mb_targets);
      net::check_finite(step.gradient, "Q gradient");
      if (epoch == 0 && settings.keep_first_epoch_grads) stats.first_epoch_grads.push_back(step.gradient);
      net::adam_step(params.values(), opt, net::clip_global_norm(step.gradient, settings.max_grad_norm),
                     settings.lr);
      loss_sum += step.loss;
      ++stats.optimizer_steps;
    }
  }
  stats.mean_loss = loss_sum / stats.optimizer_steps;
  return stats;
}

}  // namespace abslab::agents
