#pragma once

#include "mfp/common.hpp"

namespace mfp {

/// Adam moment estimates for one flat parameter vector.
struct AdamState {
  Vec m;
  Vec v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}
};

/// Standard bias-corrected Adam update, in place. Throws NumericError on a
/// non-finite gradient entry.
void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr);

/// Plain gradient ascent: eta <- eta + lr * grad (the adversary's update).
void sgd_ascent_step(Vec& eta_params, const Vec& grad, double lr);

}  // namespace mfp
