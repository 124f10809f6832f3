#pragma once

#include "abslab/adam.hpp"
#include "abslab/mlp.hpp"
#include "abslab/rollout.hpp"

namespace abslab::agents {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian with a state-dependent mean and a learned,
// state-independent log standard deviation.
struct GaussianPolicy {
  net::MlpParams mean;
  Vector log_std;

  static GaussianPolicy initialize(int obs_dim, const std::vector<int>& hidden, int action_dim,
                                   Rng& rng);
  int action_dim() const { return static_cast<int>(log_std.size()); }
  // log_std clamped to [kLogStdMin, kLogStdMax].
  Vector clamped_log_std() const;
};

// log N(action | mean, exp(log_std)) summed over action dimensions.
double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         const Vector& log_std);

// PPO learner: policy plus a separate value network of the same hidden shape.
struct PpoAgent {
  GaussianPolicy policy;
  net::MlpParams value;

  static PpoAgent initialize(int obs_dim, const std::vector<int>& hidden, int action_dim, Rng& rng);

  // Concatenation [policy mean params, log_std, value params] for the optimizer.
  Vector pack() const;
  void unpack(const Vector& flat);
  Eigen::Index packed_size() const;
};

// L lockstep steps sampling a ~ N(mu(s), sigma). Caches log-probs of the raw
// (unclipped) samples and V(s) for L+1 steps; V(final obs) at truncations.
RolloutBuffer collect_gaussian_rollout(const PpoAgent& agent, env::EnvBatch& env, int steps, Rng& rng);

// Per-sample clipped surrogate min(rho*A, clip(rho, 1-eps, 1+eps)*A).
double clipped_surrogate(double ratio, double advantage, double clip);
// d clipped_surrogate / d log pi = rho*A on the unclipped branch, 0 on the clipped one.
double clipped_surrogate_grad(double ratio, double advantage, double clip);

struct PpoSettings {
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  bool clip_value_loss = true;
  bool normalize_advantages = true;
  int minibatches = 32;
  int epochs = 10;
  double lr = 3e-4;
  double max_grad_norm = 0.5;
  double gamma = 0.99;
  double gae_lambda = 0.95;
};

struct PpoStats {
  double policy_loss = 0.0;  // mean of -surrogate over minibatches
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  // max |rho - 1| over the first minibatch of the first epoch.
  double initial_ratio_deviation = 0.0;
  int optimizer_steps = 0;
};

// Computes GAE on `buf`, then optimizes the clipped PPO objective.
PpoStats ppo_update(PpoAgent& agent, net::AdamState& opt, const RolloutBuffer& buf,
                    const PpoSettings& settings, Rng& shuffle_rng);

}  // namespace abslab::agents
