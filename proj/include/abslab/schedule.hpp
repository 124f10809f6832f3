#pragma once

#include <deque>
#include <optional>

#include "abslab/mlp.hpp"
#include "abslab/ppo.hpp"
#include "abslab/replay.hpp"
#include "abslab/rng.hpp"

namespace abslab::sched {

// Interpolation weight in [0, 1]: 0 at or below delta_min, 1 at or above
// delta_max, logarithmic in between.
double interp_factor(double divergence, double delta_min, double delta_max);

// Length (or batch size) for a given weight: max at alpha = 0, min at alpha = 1.
double target_length(double alpha, double min_len, double max_len);

// Most recent divergence measurements, at most `capacity` of them.
class DivergenceWindow {
 public:
  explicit DivergenceWindow(int capacity);

  void push(double divergence);
  int size() const { return static_cast<int>(values_.size()); }
  int capacity() const { return capacity_; }
  bool full() const { return size() == capacity_; }
  const std::deque<double>& values() const { return values_; }

 private:
  int capacity_;
  std::deque<double> values_;
};

// Mean of the window; nullopt for an empty window, in which case the caller
// keeps the minimum length (burn-in).
std::optional<double> smoothed_divergence(const DivergenceWindow& window);

// (1 - beta) * previous + beta * target.
double ema_rollout(double previous, double target, double beta);

// max(1, round(base_epochs * length / base_length)).
int compensated_epochs(int base_epochs, int length, int base_length);

struct ScalerSettings {
  int min_len = 16;
  int max_len = 64;
  double delta_min = 0.05;
  double delta_max = 0.95;
  int window = 10;
  double ema_beta = 0.5;
  // Consumed lengths are multiples of this (bounds must be multiples too).
  int granularity = 1;
};

// Validates ordering and ranges; throws ContractViolation.
void validate(const ScalerSettings& s);

struct ScaleTick {
  double divergence_raw = 0.0;
  double divergence_smoothed = 0.0;
  bool burn_in = true;
  double alpha = 0.0;   // meaningful only after burn-in
  double target = 0.0;  // meaningful only after burn-in
  double current = 0.0; // EMA state after this measurement
};

// Maps a stream of divergence measurements to a smoothed length. Until the
// window holds `window` measurements the length stays at min_len.
class AdaptiveScaler {
 public:
  explicit AdaptiveScaler(const ScalerSettings& settings);

  ScaleTick observe(double divergence);

  double current_real() const { return current_; }
  // Rounded to the nearest multiple of the granularity, clamped to the bounds.
  int current() const;
  const DivergenceWindow& window() const { return window_; }
  const ScalerSettings& settings() const { return settings_; }

 private:
  ScalerSettings settings_;
  DivergenceWindow window_;
  double current_;
};

// ------------------------------------------------------------------ PQN

struct AbsSettings {
  ScalerSettings scale;
  int adapt_every = 50;   // K, in training iterations
  int ref_batch = 2048;   // M
  int base_epochs = 2;
  int base_length = 32;   // length at which base_epochs apply
  bool compensate_epochs = true;
};

struct AbsTick {
  int length = 0;
  int epochs = 0;
  std::optional<ScaleTick> adaptation;  // set on measurement iterations
};

// Behavioral-divergence rollout scheduler. Call tick() once per training
// iteration after the update. Every adapt_every iterations it measures the
// divergence between the current network and the snapshot taken at the
// previous measurement, feeds the scaler, then refreshes the snapshot.
class AbsScheduler {
 public:
  AbsScheduler(const AbsSettings& settings, const net::MlpParams& initial, Rng rng);

  AbsTick tick(const net::MlpParams& params, const Matrix& rollout_obs);

  int length() const { return scaler_.current(); }
  int epochs() const;
  long iteration() const { return iteration_; }
  const net::MlpParams& snapshot() const { return snapshot_; }
  const AdaptiveScaler& scaler() const { return scaler_; }

 private:
  AbsSettings settings_;
  AdaptiveScaler scaler_;
  net::MlpParams snapshot_;
  Rng rng_;
  long iteration_ = 0;
};

// ------------------------------------------------------------------ PPO

struct ArsSettings {
  ScalerSettings scale{1024, 8192, 0.01, 0.1, 10, 0.5, 1};
  int adapt_every = 10;
  int ref_batch = 2048;
};

struct ArsTick {
  int length = 0;
  std::optional<ScaleTick> adaptation;
};

// Same pipeline as AbsScheduler with the mean Gaussian KL as the metric.
class ArsScheduler {
 public:
  ArsScheduler(const ArsSettings& settings, const agents::GaussianPolicy& initial, Rng rng);

  ArsTick tick(const agents::GaussianPolicy& policy, const Matrix& rollout_obs);

  int length() const { return scaler_.current(); }
  const AdaptiveScaler& scaler() const { return scaler_; }

 private:
  ArsSettings settings_;
  AdaptiveScaler scaler_;
  agents::GaussianPolicy snapshot_;
  Rng rng_;
  long iteration_ = 0;
};

// ------------------------------------------------------------------ replay

struct ReplayBatchSettings {
  ScalerSettings scale{64, 1024, 0.05, 0.95, 10, 0.5, 1};
  int adapt_every = 50;
  int ref_batch = 2048;
};

struct ReplayBatchTick {
  int batch = 0;
  std::optional<ScaleTick> adaptation;
};

// Batch-size variant for replay learners: reference states come from the
// replay buffer and the scaled quantity is the sampled batch size.
class ReplayBatchScheduler {
 public:
  ReplayBatchScheduler(const ReplayBatchSettings& settings, const net::MlpParams& initial, Rng rng);

  ReplayBatchTick tick(const net::MlpParams& params, const agents::ReplayBuffer& rb);

  int batch() const { return scaler_.current(); }
  const AdaptiveScaler& scaler() const { return scaler_; }

 private:
  ReplayBatchSettings settings_;
  AdaptiveScaler scaler_;
  net::MlpParams snapshot_;
  Rng rng_;
  long iteration_ = 0;
};

// Batch size the replay variant consumes for a given divergence, bypassing
// smoothing: round(B_max - alpha * (B_max - B_min)).
int replay_batch_for(double divergence, const ScalerSettings& s);

}  // namespace abslab::sched
