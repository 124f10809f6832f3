#include "abslab/returns.hpp"

#include <cmath>

#include "abslab/error.hpp"

namespace abslab::agents {

Vector q_lambda_returns(const RolloutBuffer& buf, double gamma, double lambda) {
  const int steps = buf.steps;
  const int n = buf.envs;
  require(buf.q_values.rows() == static_cast<Eigen::Index>(steps + 1) * n,
          "Q(lambda) needs cached Q values for L+1 steps");
  Vector targets(static_cast<Eigen::Index>(steps) * n);
  for (int i = 0; i < n; ++i) {
    double next_return = buf.q_values.row(buf.row(steps, i)).maxCoeff();
    for (int t = steps - 1; t >= 0; --t) {
      const int r = buf.row(t, i);
      double ret;
      if (buf.truncated[r]) {
        ret = buf.rewards[r] + gamma * buf.truncation_bootstrap[r];
      } else if (buf.done[r]) {
        ret = buf.rewards[r];
      } else {
        const double next_max = buf.q_values.row(buf.row(t + 1, i)).maxCoeff();
        ret = buf.rewards[r] + gamma * ((1.0 - lambda) * next_max + lambda * next_return);
      }
      targets[r] = ret;
      next_return = ret;
    }
  }
  return targets;
}

GaeResult gae(const RolloutBuffer& buf, double gamma, double lambda) {
  const int steps = buf.steps;
  const int n = buf.envs;
  require(buf.values.size() == static_cast<Eigen::Index>(steps + 1) * n,
          "GAE needs cached values for L+1 steps");
  GaeResult out;
  out.advantages.resize(static_cast<Eigen::Index>(steps) * n);
  for (int i = 0; i < n; ++i) {
    double next_adv = 0.0;
    for (int t = steps - 1; t >= 0; --t) {
      const int r = buf.row(t, i);
      double next_value = buf.values[buf.row(t + 1, i)];
      if (buf.done[r]) next_value = buf.truncated[r] ? buf.truncation_bootstrap[r] : 0.0;
      const double delta = buf.rewards[r] + gamma * next_value - buf.values[r];
      const double carry = buf.done[r] ? 0.0 : gamma * lambda * next_adv;
      out.advantages[r] = delta + carry;
      next_adv = out.advantages[r];
    }
  }
  out.value_targets = out.advantages + buf.values.head(out.advantages.size());
  return out;
}

Vector normalize_advantages(const Vector& adv) {
  const Eigen::Index n = adv.size();
  if (n < 2) return Vector::Zero(n);
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().sum() / static_cast<double>(n - 1);
  return (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

}  // namespace abslab::agents
