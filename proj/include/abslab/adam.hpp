#pragma once

#include <cstdint>

#include "abslab/types.hpp"

namespace abslab::net {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment estimates for a flat parameter vector.
struct AdamState {
  AdamState() = default;
  explicit AdamState(Eigen::Index size, AdamHyper hyper = {})
      : first(Vector::Zero(size)), second(Vector::Zero(size)), hyper(hyper) {}

  Vector first;
  Vector second;
  std::int64_t step = 0;
  AdamHyper hyper;
};

// Bias-corrected Adam update of `params` in place. A non-finite gradient
// raises TrainingDivergence before anything is modified.
void adam_step(Vector& params, AdamState& opt, const Vector& grad, double lr);

}  // namespace abslab::net
