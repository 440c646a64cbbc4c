#include "mfp/particle.hpp"

#include <algorithm>
#include <cmath>

namespace mfp {

ParticleState::ParticleState(Mat positions, double dt_, RngStream rng_stream)
    : X(std::move(positions)), dt(dt_), rng(std::move(rng_stream)) {
  if (X.rows() < 2) throw std::invalid_argument("ParticleState: need N >= 2 particles");
  if (dt <= 0) throw std::invalid_argument("ParticleState: dt must be positive");
}

namespace {

void em_substep(ParticleState& state, const ProblemSpec& spec, double h) {
  const Eigen::RowVectorXd mean = state.X.colwise().mean();
  // drift = -theta x - (x - xbar); the interaction sum includes j = i.
  Mat drift = (-(spec.theta + 1.0)) * state.X;
  drift.rowwise() += mean;
  state.X += h * drift;
  state.X += (spec.sigma * std::sqrt(h)) *
             state.rng.normal_matrix(state.count(), static_cast<int>(state.X.cols()));
  state.time += h;
  if (!state.X.allFinite())
    throw NumericError("particle positions became non-finite at t=" +
                       std::to_string(state.time));
}

}  // namespace

void em_step(ParticleState& state, const ProblemSpec& spec) {
  em_substep(state, spec, state.dt);
}

MomentTrajectory simulate_particles(const ProblemSpec& spec, int N, double dt, double T,
                                    std::uint64_t seed,
                                    const std::vector<double>& record_times) {
  spec.validate();
  if (N < 2) throw std::invalid_argument("simulate_particles: N must be >= 2");
  if (dt <= 0 || T <= 0) throw std::invalid_argument("simulate_particles: dt, T must be positive");
  if (!std::is_sorted(record_times.begin(), record_times.end()))
    throw std::invalid_argument("simulate_particles: record_times must be sorted");
  for (double t : record_times)
    if (t < 0 || t > T + 1e-12)
      throw std::invalid_argument("simulate_particles: record time outside [0, T]");

  RngStream rng(seed, stream_id::particles);
  ParticleState state(sample_initial(spec, N, rng), dt, std::move(rng));

  MomentTrajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    const Vec mean = state.X.colwise().mean();
    const Mat centered = state.X.rowwise() - mean.transpose();
    traj.means.push_back(mean);
    traj.variances.push_back(centered.colwise().squaredNorm().transpose() /
                             static_cast<double>(N - 1));
  };

  const double eps = 1e-12;
  for (double t_rec : record_times) {
    while (state.time + dt <= t_rec + eps) em_substep(state, spec, dt);
    const double remainder = t_rec - state.time;
    if (remainder > eps) em_substep(state, spec, remainder);
    record(t_rec);
  }
  return traj;
}

}  // namespace mfp
