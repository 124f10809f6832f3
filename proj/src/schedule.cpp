#include "abslab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "abslab/divergence.hpp"
#include "abslab/error.hpp"

namespace abslab::sched {

double interp_factor(double divergence, double delta_min, double delta_max) {
  require(delta_min > 0.0 && delta_min < delta_max, "need 0 < delta_min < delta_max");
  const double clipped = std::clamp(divergence, delta_min, delta_max);
  return std::log(clipped / delta_min) / std::log(delta_max / delta_min);
}

double target_length(double alpha, double min_len, double max_len) {
  require(alpha >= 0.0 && alpha <= 1.0, "interpolation weight must lie in [0, 1]");
  return max_len - alpha * (max_len - min_len);
}

DivergenceWindow::DivergenceWindow(int capacity) : capacity_(capacity) {
  require(capacity >= 1, "divergence window needs capacity >= 1");
}

void DivergenceWindow::push(double divergence) {
  values_.push_back(divergence);
  if (size() > capacity_) values_.pop_front();
}

std::optional<double> smoothed_divergence(const DivergenceWindow& window) {
  if (window.size() == 0) return std::nullopt;
  const auto& v = window.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double ema_rollout(double previous, double target, double beta) {
  require(beta > 0.0 && beta <= 1.0, "EMA coefficient must lie in (0, 1]");
  return (1.0 - beta) * previous + beta * target;
}

int compensated_epochs(int base_epochs, int length, int base_length) {
  require(base_epochs > 0 && length > 0 && base_length > 0, "epoch compensation needs positive inputs");
  const double scaled = static_cast<double>(base_epochs) * length / base_length;
  return std::max(1, static_cast<int>(std::lround(scaled)));
}

void validate(const ScalerSettings& s) {
  require(s.min_len >= 1 && s.min_len <= s.max_len,
          fmt::format("length bounds must satisfy 1 <= min ({}) <= max ({})", s.min_len, s.max_len));
  require(s.delta_min > 0.0 && s.delta_min < s.delta_max,
          fmt::format("thresholds must satisfy 0 < delta_min ({}) < delta_max ({})", s.delta_min,
                      s.delta_max));
  require(s.window >= 1, "window must be at least 1");
  require(s.ema_beta > 0.0 && s.ema_beta <= 1.0, "ema_beta must lie in (0, 1]");
  require(s.granularity >= 1 && s.min_len % s.granularity == 0 && s.max_len % s.granularity == 0,
          fmt::format("length bounds must be multiples of {}", s.granularity));
}

AdaptiveScaler::AdaptiveScaler(const ScalerSettings& settings)
    : settings_(settings), window_(settings.window), current_(settings.min_len) {
  validate(settings_);
}

ScaleTick AdaptiveScaler::observe(double divergence) {
  window_.push(divergence);
  ScaleTick tick;
  tick.divergence_raw = divergence;
  tick.divergence_smoothed = *smoothed_divergence(window_);
  tick.burn_in = !window_.full();
  if (!tick.burn_in) {
    tick.alpha = interp_factor(tick.divergence_smoothed, settings_.delta_min, settings_.delta_max);
    tick.target = target_length(tick.alpha, settings_.min_len, settings_.max_len);
    current_ = ema_rollout(current_, tick.target, settings_.ema_beta);
  }
  tick.current = current_;
  return tick;
}

int AdaptiveScaler::current() const {
  const int g = settings_.granularity;
  const int rounded = static_cast<int>(std::lround(current_ / g)) * g;
  return std::clamp(rounded, settings_.min_len, settings_.max_len);
}

// ------------------------------------------------------------------ PQN

AbsScheduler::AbsScheduler(const AbsSettings& settings, const net::MlpParams& initial, Rng rng)
    : settings_(settings), scaler_(settings.scale), snapshot_(initial), rng_(std::move(rng)) {
  require(settings.adapt_every >= 1, "adapt frequency must be at least 1");
  require(settings.ref_batch >= 1, "reference batch size must be at least 1");
}

int AbsScheduler::epochs() const {
  if (!settings_.compensate_epochs) return settings_.base_epochs;
  return compensated_epochs(settings_.base_epochs, length(), settings_.base_length);
}

AbsTick AbsScheduler::tick(const net::MlpParams& params, const Matrix& rollout_obs) {
  ++iteration_;
  AbsTick out;
  if (iteration_ % settings_.adapt_every == 0) {
    const Matrix ref = sample_reference(rollout_obs, settings_.ref_batch, rng_);
    out.adaptation = scaler_.observe(behavioral_divergence(params, snapshot_, ref));
    snapshot_ = params;
  }
  out.length = length();
  out.epochs = epochs();
  return out;
}

// ------------------------------------------------------------------ PPO

ArsScheduler::ArsScheduler(const ArsSettings& settings, const agents::GaussianPolicy& initial, Rng rng)
    : settings_(settings), scaler_(settings.scale), snapshot_(initial), rng_(std::move(rng)) {
  require(settings.adapt_every >= 1, "adapt frequency must be at least 1");
  require(settings.ref_batch >= 1, "reference batch size must be at least 1");
}

ArsTick ArsScheduler::tick(const agents::GaussianPolicy& policy, const Matrix& rollout_obs) {
  ++iteration_;
  ArsTick out;
  if (iteration_ % settings_.adapt_every == 0) {
    const Matrix ref = sample_reference(rollout_obs, settings_.ref_batch, rng_);
    out.adaptation = scaler_.observe(kl_gaussian_divergence(policy, snapshot_, ref));
    snapshot_ = policy;
  }
  out.length = length();
  return out;
}

// ------------------------------------------------------------------ replay

ReplayBatchScheduler::ReplayBatchScheduler(const ReplayBatchSettings& settings,
                                           const net::MlpParams& initial, Rng rng)
    : settings_(settings), scaler_(settings.scale), snapshot_(initial), rng_(std::move(rng)) {
  require(settings.adapt_every >= 1, "adapt frequency must be at least 1");
  require(settings.ref_batch >= 1, "reference batch size must be at least 1");
}

ReplayBatchTick ReplayBatchScheduler::tick(const net::MlpParams& params, const agents::ReplayBuffer& rb) {
  ++iteration_;
  ReplayBatchTick out;
  if (iteration_ % settings_.adapt_every == 0 && rb.size() > 0) {
    const Matrix filled = rb.obs().topRows(rb.size());
    const Matrix ref = sample_reference(filled, settings_.ref_batch, rng_);
    out.adaptation = scaler_.observe(behavioral_divergence(params, snapshot_, ref));
    snapshot_ = params;
  }
  out.batch = batch();
  return out;
}

int replay_batch_for(double divergence, const ScalerSettings& s) {
  const double alpha = interp_factor(divergence, s.delta_min, s.delta_max);
  return static_cast<int>(std::lround(target_length(alpha, s.min_len, s.max_len)));
}

}  // namespace abslab::sched
