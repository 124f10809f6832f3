#pragma once

#include <optional>
#include <span>

#include "abslab/mlp.hpp"

namespace abslab::sched {

// Micro-batch gradient noise scale estimate.
struct GnsEstimate {
  double noise = 0.0;             // b / (m - 1) * sum_i |g_i - g_mean|^2, estimates tr(Sigma)
  double signal = 0.0;            // |g_mean|^2 - noise / B, estimates |G|^2
  std::optional<double> b_simple; // noise / signal; empty when signal <= 0
  int micro_count = 0;            // m
  double micro_size = 0.0;        // b
  double batch = 0.0;             // B = m * b

  bool degenerate() const { return !b_simple.has_value(); }
};

// Requires m >= 2 equally sized gradients and B == m * b.
GnsEstimate gns_estimate(std::span<const net::GradVector> micro_grads, double micro_size, double batch);

// clip(floor(b_simple), B_min, B_max); the previous batch size when the
// estimate is degenerate.
long gns_target_batch(const GnsEstimate& est, long batch_min, long batch_max, long previous);

}  // namespace abslab::sched
