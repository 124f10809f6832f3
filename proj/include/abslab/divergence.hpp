#pragma once

#include <span>

#include "abslab/mlp.hpp"
#include "abslab/ppo.hpp"
#include "abslab/rng.hpp"
#include "abslab/types.hpp"

namespace abslab::sched {

// Fraction of rows whose greedy actions differ. Ties resolve to the lowest
// action index in both tables.
double action_mismatch(const Matrix& q_new, const Matrix& q_old);

// Behavioral divergence of two Q networks on the reference states.
double behavioral_divergence(const net::MlpParams& params_new, const net::MlpParams& params_old,
                             const Matrix& ref_obs);

// KL(N(mu_new, s_new) || N(mu_old, s_old)) for diagonal Gaussians, summed
// over dimensions; `*_log_std` are log standard deviations.
double gaussian_kl(std::span<const double> mu_new, std::span<const double> log_std_new,
                   std::span<const double> mu_old, std::span<const double> log_std_old);

// Mean over reference states of KL(pi_new(.|s) || pi_old(.|s)).
double kl_gaussian_divergence(const agents::GaussianPolicy& policy_new,
                              const agents::GaussianPolicy& policy_old, const Matrix& ref_obs);

// min(count, rows) rows drawn uniformly without replacement, in source order.
Matrix sample_reference(const Matrix& states, int count, Rng& rng);

}  // namespace abslab::sched
