#pragma once

#include <vector>

#include "abslab/adam.hpp"
#include "abslab/mlp.hpp"
#include "abslab/rollout.hpp"

namespace abslab::agents {

struct RegressionLoss {
  double loss = 0.0;          // mean of (Q(s, a) - y)^2
  net::GradVector gradient;   // d loss / d params
};

// Squared error between Q(s_i, a_i) and fixed targets y_i, mean over rows.
RegressionLoss q_regression_loss(const net::MlpParams& params, const Matrix& obs,
                                 std::span<const int> actions, const Vector& targets);

struct PqnUpdateSettings {
  int minibatches = 4;
  int epochs = 2;
  double lr = 2.5e-4;
  double max_grad_norm = 10.0;
  // Keep the unclipped minibatch gradients of the first epoch (GNS micro-batches).
  bool keep_first_epoch_grads = false;
};

struct PqnUpdateStats {
  double mean_loss = 0.0;
  int optimizer_steps = 0;
  std::vector<net::GradVector> first_epoch_grads;
};

// Regresses Q(s, a) onto buf.targets for `epochs` passes. Each pass shuffles
// the flattened L*E transitions and splits them into `minibatches` equal
// parts; every part is one clipped Adam step. Targets stay fixed.
PqnUpdateStats pqn_update(net::MlpParams& params, net::AdamState& opt, const RolloutBuffer& buf,
                          const PqnUpdateSettings& settings, Rng& shuffle_rng);

}  // namespace abslab::agents
