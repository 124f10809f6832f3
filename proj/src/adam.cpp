#include "abslab/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "abslab/error.hpp"
#include "abslab/mlp.hpp"

namespace abslab::net {

void adam_step(Vector& params, AdamState& opt, const Vector& grad, double lr) {
  require(params.size() == grad.size() && opt.first.size() == grad.size() &&
              opt.second.size() == grad.size(),
          fmt::format("Adam size mismatch: params {}, grad {}, moments {}", params.size(),
                      grad.size(), opt.first.size()));
  check_finite(grad, "gradient");
  const auto& h = opt.hyper;
  ++opt.step;
  opt.first = h.beta1 * opt.first + (1.0 - h.beta1) * grad;
  opt.second = h.beta2 * opt.second + (1.0 - h.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  params.array() -=
      lr * (opt.first.array() / c1) / ((opt.second.array() / c2).sqrt() + h.eps);
}

}  // namespace abslab::net
