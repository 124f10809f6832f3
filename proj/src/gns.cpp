#include "abslab/gns.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab::sched {

GnsEstimate gns_estimate(std::span<const net::GradVector> micro_grads, double micro_size, double batch) {
  const auto m = static_cast<int>(micro_grads.size());
  require(m >= 2, "GNS needs at least two micro-batch gradients");
  require(micro_size > 0.0 && std::abs(batch - m * micro_size) <= 1e-9 * batch,
          fmt::format("GNS batch {} must equal {} micro-batches of size {}", batch, m, micro_size));
  net::GradVector mean = net::GradVector::Zero(micro_grads[0].size());
  for (const auto& g : micro_grads) {
    require(g.size() == mean.size(), "micro-batch gradients differ in length");
    mean += g;
  }
  mean /= static_cast<double>(m);
  double spread = 0.0;
  for (const auto& g : micro_grads) spread += (g - mean).squaredNorm();

  GnsEstimate est;
  est.micro_count = m;
  est.micro_size = micro_size;
  est.batch = batch;
  est.noise = micro_size * spread / (m - 1);
  est.signal = mean.squaredNorm() - est.noise / batch;
  if (est.signal > 0.0) est.b_simple = est.noise / est.signal;
  return est;
}

long gns_target_batch(const GnsEstimate& est, long batch_min, long batch_max, long previous) {
  require(batch_min >= 1 && batch_min <= batch_max, "GNS batch bounds out of order");
  if (est.degenerate()) return previous;
  const double floored = std::floor(*est.b_simple);
  if (floored <= static_cast<double>(batch_min)) return batch_min;
  if (floored >= static_cast<double>(batch_max)) return batch_max;
  return static_cast<long>(floored);
}

}  // namespace abslab::sched
