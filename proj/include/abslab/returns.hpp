#pragma once

#include "abslab/rollout.hpp"

namespace abslab::agents {

// Backward Q(lambda) recursion over a rollout of cached Q values:
//
//   R_t = r_t + gamma * ((1 - lambda) * max_a Q(s_{t+1}, a) + lambda * R_{t+1})
//
// with R_L = max_a Q(s_L, a) at the bootstrap step, R_t = r_t at terminal
// steps and R_t = r_t + gamma * max_a Q(final obs) at truncated steps.
Vector q_lambda_returns(const RolloutBuffer& buf, double gamma, double lambda);

struct GaeResult {
  Vector advantages;     // raw, not normalized
  Vector value_targets;  // advantages + V(s_t)
};

// Generalized advantage estimation over cached values. Truncated steps
// bootstrap from V(final obs); terminal steps do not bootstrap.
GaeResult gae(const RolloutBuffer& buf, double gamma, double lambda);

// Shift and scale to zero mean and unit (sample) standard deviation.
Vector normalize_advantages(const Vector& adv);

}  // namespace abslab::agents
