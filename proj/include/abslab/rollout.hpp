#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abslab/env.hpp"
#include "abslab/mlp.hpp"
#include "abslab/rng.hpp"
#include "abslab/types.hpp"

namespace abslab::agents {

// Transitions of E environments over L lockstep steps. Row t*E + i of every
// per-transition array belongs to env i at step t; observation and network
// output arrays carry one extra block of E rows for the bootstrap step L.
struct RolloutBuffer {
  int steps = 0;  // L
  int envs = 0;   // E

  Matrix obs;                          // (L+1)E x obs_dim
  std::vector<int> actions;            // LE, discrete learners
  Matrix continuous_actions;           // LE x action_dim, Gaussian policy (unclipped samples)
  Vector rewards;                      // LE
  std::vector<std::uint8_t> done;      // LE, terminated or truncated
  std::vector<std::uint8_t> truncated; // LE
  Matrix q_values;                     // (L+1)E x A, Q learners
  Vector values;                       // (L+1)E, value learner
  Vector logprob;                      // LE, Gaussian policy
  // Value of the pre-reset observation at truncated steps: max_a Q or V.
  Vector truncation_bootstrap;         // LE
  Vector targets;                      // LE, filled by return computation

  std::vector<double> finished_returns;  // episodes that ended during collection

  int size() const { return steps * envs; }
  int row(int t, int i) const { return t * envs + i; }
  // First L*E observation rows (the states the transitions start from).
  Matrix transition_obs() const { return obs.topRows(static_cast<Eigen::Index>(size())); }
};

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.001;
  double fraction = 0.10;
};

// Linear decay from start at t = 0 to end at t = fraction * total, then flat.
double epsilon_at(std::int64_t t, std::int64_t total, const EpsilonSchedule& schedule = {});

// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(std::span<const double> row);
std::vector<int> greedy_actions(const Matrix& q);

// Greedy action with probability 1 - epsilon, uniform action otherwise.
int epsilon_greedy(std::span<const double> q_row, double epsilon, Rng& rng);

// L lockstep steps of epsilon-greedy over Q(s, .) computed by `params`.
// Caches every Q row (including the bootstrap step) and, for truncated
// steps, max_a Q of the pre-reset observation.
RolloutBuffer collect_q_rollout(const net::MlpParams& params, env::EnvBatch& env, int steps,
                                double epsilon, Rng& rng);

}  // namespace abslab::agents
