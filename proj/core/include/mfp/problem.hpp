#pragma once

#include <vector>

#include "mfp/common.hpp"
#include "mfp/rng.hpp"

namespace mfp {

enum class KernelType { Quadratic, MollifiedLog };

/// Mean-field problem definition: quadratic confinement V = (theta/2)|x|^2,
/// pairwise interaction kernel, noise sigma, Gaussian initial law. The
/// effective mean-reversion rate lambda = theta + 1 is derived, never stored,
/// because the quadratic kernel contributes exactly 1 to it.
struct ProblemSpec {
  int n = 1;
  double theta = 1.0;
  double sigma = 1.0;
  KernelType kernel = KernelType::Quadratic;
  double kernel_eps = 0.0;  // mollification width for MollifiedLog
  double T = 1.0;           // horizon (time-dependent only)
  Vec mu0;                  // initial mean (defaults to zero)
  double Sigma0 = 0.25;     // isotropic initial variance per component

  double lambda() const { return theta + 1.0; }
  Vec initial_mean() const { return mu0.size() == n ? mu0 : Vec::Zero(n); }
  void validate() const;
};

/// Time-indexed per-component means and variances (exact or empirical).
struct MomentTrajectory {
  std::vector<double> times;
  std::vector<Vec> means;
  std::vector<Vec> variances;
};

/// grad V = theta * x.
Vec grad_V(const ProblemSpec& spec, const Vec& x);

/// Quadratic kernel W(z) = |z|^2 / 2: grad W = z (odd, vanishing at 0).
Vec grad_W_quadratic(const Vec& z);

/// Mollified Keller-Segel kernel W = -log|z| with |z| replaced by
/// sqrt(|z|^2 + eps^2): grad = -z / (|z|^2 + eps^2). Bounded by 1/(2 eps).
Vec grad_W_mollified_log(const Vec& z, double eps);

/// b(x, rho) = -lambda x + m for the quadratic kernel (m = E_rho[x]).
Vec effective_drift_quadratic(const ProblemSpec& spec, const Vec& x, const Vec& m);

/// Closed-form moments of the linear benchmark:
///   m(t) = mu0 exp(-theta t),  Sigma(t) = (Sigma0 - s*) exp(-2 lambda t) + s*
/// with s* = sigma^2 / (2 lambda).
MomentTrajectory exact_moments(const ProblemSpec& spec, const std::vector<double>& times);

/// Stationary law N(0, sigma^2/(2 lambda) I): returns (zero mean, variance).
std::pair<Vec, double> stationary_moments(const ProblemSpec& spec);

/// M i.i.d. draws from the initial law N(mu0, Sigma0 I), one per row.
Mat sample_initial(const ProblemSpec& spec, int M, RngStream& rng);

/// Stationary weak residual of a single 1-D plane wave sin(w x + b) under the
/// symmetric two-point law at +-a (the variance-matched spurious minimizer):
///   R = sin(b) (lambda a w sin(wa) - (sigma^2 w^2 / 2) cos(wa)).
/// O(w^2) as w -> 0, which is why small test frequencies cannot separate the
/// two-point law from the true Gaussian.
double two_point_residual(double w, double b, double a, double lambda, double sigma);

}  // namespace mfp
