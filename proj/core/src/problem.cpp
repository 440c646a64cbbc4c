#include "mfp/problem.hpp"

#include <cmath>

namespace mfp {

void ProblemSpec::validate() const {
  if (n < 1) throw std::invalid_argument("ProblemSpec: n must be >= 1");
  if (theta <= 0) throw std::invalid_argument("ProblemSpec: theta must be positive");
  if (sigma <= 0) throw std::invalid_argument("ProblemSpec: sigma must be positive");
  if (kernel == KernelType::MollifiedLog && kernel_eps <= 0)
    throw std::invalid_argument("ProblemSpec: kernel_eps must be positive for mollified-log");
  if (T <= 0) throw std::invalid_argument("ProblemSpec: T must be positive");
  if (Sigma0 <= 0) throw std::invalid_argument("ProblemSpec: Sigma0 must be positive");
  if (mu0.size() != 0 && mu0.size() != n)
    throw std::invalid_argument("ProblemSpec: mu0 length != n");
}

Vec grad_V(const ProblemSpec& spec, const Vec& x) {
  if (x.size() != spec.n) throw std::invalid_argument("grad_V: dimension mismatch");
  return spec.theta * x;
}

Vec grad_W_quadratic(const Vec& z) { return z; }

Vec grad_W_mollified_log(const Vec& z, double eps) {
  if (eps <= 0) throw std::invalid_argument("grad_W_mollified_log: eps must be positive");
  return -z / (z.squaredNorm() + eps * eps);
}

Vec effective_drift_quadratic(const ProblemSpec& spec, const Vec& x, const Vec& m) {
  if (x.size() != spec.n || m.size() != spec.n)
    throw std::invalid_argument("effective_drift_quadratic: dimension mismatch");
  return -spec.lambda() * x + m;
}

MomentTrajectory exact_moments(const ProblemSpec& spec, const std::vector<double>& times) {
  spec.validate();
  const double lam = spec.lambda();
  const double equil = spec.sigma * spec.sigma / (2.0 * lam);
  const Vec m0 = spec.initial_mean();
  MomentTrajectory traj;
  traj.times = times;
  for (double t : times) {
    traj.means.push_back(m0 * std::exp(-spec.theta * t));
    const double var = (spec.Sigma0 - equil) * std::exp(-2.0 * lam * t) + equil;
    traj.variances.push_back(Vec::Constant(spec.n, var));
  }
  return traj;
}

std::pair<Vec, double> stationary_moments(const ProblemSpec& spec) {
  return {Vec::Zero(spec.n), spec.sigma * spec.sigma / (2.0 * spec.lambda())};
}

Mat sample_initial(const ProblemSpec& spec, int M, RngStream& rng) {
  Mat X = std::sqrt(spec.Sigma0) * rng.normal_matrix(M, spec.n);
  X.rowwise() += spec.initial_mean().transpose();
  return X;
}

double two_point_residual(double w, double b, double a, double lambda, double sigma) {
  const double wa = w * a;
  return std::sin(b) *
         (lambda * a * w * std::sin(wa) - 0.5 * sigma * sigma * w * w * std::cos(wa));
}

}  // namespace mfp
