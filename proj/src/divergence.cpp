#include "abslab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abslab/error.hpp"
#include "abslab/rollout.hpp"

namespace abslab::sched {

double action_mismatch(const Matrix& q_new, const Matrix& q_old) {
  require(q_new.rows() == q_old.rows() && q_new.cols() == q_old.cols(), "Q tables differ in shape");
  require(q_new.rows() >= 1, "divergence needs at least one reference state");
  const std::vector<int> a_new = agents::greedy_actions(q_new);
  const std::vector<int> a_old = agents::greedy_actions(q_old);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a_new.size(); ++i) differ += a_new[i] != a_old[i] ? 1 : 0;
  return static_cast<double>(differ) / static_cast<double>(a_new.size());
}

double behavioral_divergence(const net::MlpParams& params_new, const net::MlpParams& params_old,
                             const Matrix& ref_obs) {
  return action_mismatch(net::forward(params_new, ref_obs), net::forward(params_old, ref_obs));
}

double gaussian_kl(std::span<const double> mu_new, std::span<const double> log_std_new,
                   std::span<const double> mu_old, std::span<const double> log_std_old) {
  double kl = 0.0;
  for (std::size_t d = 0; d < mu_new.size(); ++d) {
    const double var_new = std::exp(2.0 * log_std_new[d]);
    const double var_old = std::exp(2.0 * log_std_old[d]);
    const double diff = mu_new[d] - mu_old[d];
    kl += (log_std_old[d] - log_std_new[d]) + (var_new + diff * diff) / (2.0 * var_old) - 0.5;
  }
  return kl;
}

double kl_gaussian_divergence(const agents::GaussianPolicy& policy_new,
                              const agents::GaussianPolicy& policy_old, const Matrix& ref_obs) {
  require(ref_obs.rows() >= 1, "KL divergence needs at least one reference state");
  const Matrix mu_new = net::forward(policy_new.mean, ref_obs);
  const Matrix mu_old = net::forward(policy_old.mean, ref_obs);
  const Vector ls_new = policy_new.clamped_log_std();
  const Vector ls_old = policy_old.clamped_log_std();
  const auto dim = static_cast<std::size_t>(ls_new.size());
  double total = 0.0;
  for (Eigen::Index r = 0; r < ref_obs.rows(); ++r) {
    total += gaussian_kl({mu_new.row(r).data(), dim}, {ls_new.data(), dim},
                         {mu_old.row(r).data(), dim}, {ls_old.data(), dim});
  }
  return total / static_cast<double>(ref_obs.rows());
}

Matrix sample_reference(const Matrix& states, int count, Rng& rng) {
  require(count >= 1, "reference batch size must be positive");
  const auto rows = static_cast<int>(states.rows());
  if (rows <= count) return states;
  std::vector<int> all(static_cast<std::size_t>(rows));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  std::sample(all.begin(), all.end(), std::back_inserter(picked), count, rng);
  Matrix out(count, states.cols());
  for (int k = 0; k < count; ++k) out.row(k) = states.row(picked[k]);
  return out;
}

}  // namespace abslab::sched
