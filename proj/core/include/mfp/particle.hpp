#pragma once

#include <cstdint>
#include <vector>

#include "mfp/problem.hpp"
#include "mfp/rng.hpp"

namespace mfp {

/// State of the N-particle interacting system under Euler-Maruyama.
struct ParticleState {
  Mat X;  // N x n positions
  double time = 0;
  double dt = 1e-3;
  RngStream rng;

  ParticleState(Mat positions, double dt, RngStream rng_stream);
  int count() const { return static_cast<int>(X.rows()); }
};

/// One explicit Euler-Maruyama step for the quadratic kernel:
///   X_i += dt * (-theta X_i - (X_i - Xbar)) + sigma sqrt(dt) * xi_i,
/// where Xbar is the empirical mean including the particle itself (the
/// O(1/N) self-interaction term is kept, exactly as the particle system is
/// written). Throws NumericError on non-finite positions.
void em_step(ParticleState& state, const ProblemSpec& spec);

/// Simulate N particles from rho0 to T, recording empirical per-component
/// means and (unbiased) variances at the requested times. record_times must
/// be sorted and within [0, T]; times that fall between dt steps are hit with
/// a shortened final substep.
MomentTrajectory simulate_particles(const ProblemSpec& spec, int N, double dt, double T,
                                    std::uint64_t seed,
                                    const std::vector<double>& record_times);

}  // namespace mfp
