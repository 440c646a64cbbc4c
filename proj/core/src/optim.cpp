#include "mfp/optim.hpp"

#include <cmath>

namespace mfp {

void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: length mismatch");
  check_finite(grad, "adam gradient");

  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

void sgd_ascent_step(Vec& eta_params, const Vec& grad, double lr) {
  if (eta_params.size() != grad.size())
    throw std::invalid_argument("sgd_ascent_step: length mismatch");
  check_finite(grad, "ascent gradient");
  eta_params += lr * grad;
}

}  // namespace mfp
