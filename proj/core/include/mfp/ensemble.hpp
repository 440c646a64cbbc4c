#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfp/common.hpp"
#include "mfp/rng.hpp"
#include "mfp/tape.hpp"

namespace mfp {

enum class BiasMode { UniformPhase, ZeroPhase };

/// The adversary: K plane-wave test functions
///   stationary     f_k(x)    = sin(w_k . x + b_k)
///   time-dependent psi_k(t,x) = sin(w_k . x + kappa_k t + b_k)
/// with all derivatives analytic. (W, b, kappa) together form the flat
/// adversary parameter vector.
struct PlaneWaveEnsemble {
  Mat W;      // K x n spatial frequencies
  Vec b;      // K phases
  Vec kappa;  // K time frequencies; empty in stationary mode

  int size() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(W.cols()); }
  bool time_dependent() const { return kappa.size() > 0; }

  Eigen::Index flat_size() const;
  /// Flat adversary vector [W row-major, b, kappa].
  Vec flat() const;
  void set_flat(const Vec& eta);

  void validate() const;
};

/// sigma_w ~ sqrt(2 lambda) / (sigma sqrt(n)): matches the test-function
/// wavelength to the solution's spatial scale sigma/sqrt(2 lambda), with the
/// 1/sqrt(n) correction for the concentration of w.x in high dimension.
double default_frequency_scale(double lambda, double sigma, int n);

/// W entries i.i.d. N(0, sigma_w^2); b i.i.d. uniform [0, 2 pi) (or all zero);
/// kappa (when requested) i.i.d. N(0, kappa_scale^2). Deterministic per seed.
PlaneWaveEnsemble init_ensemble(int K, int n, double sigma_w, BiasMode bias_mode,
                                std::optional<double> kappa_scale, std::uint64_t seed);

/// Batch evaluation of all K stationary test functions at M points.
struct StationaryEval {
  Mat f;                  // K x M
  std::vector<Mat> grad;  // n entries, each K x M: grad[j](k,m) = d f_k / d x_j at x_m
  Mat lap;                // K x M
};
StationaryEval eval_stationary(const PlaneWaveEnsemble& ens, const Mat& X);

/// Space-time evaluation: psi, d psi/dt, spatial gradient, spatial Laplacian.
struct SpacetimeEval {
  Mat psi;                  // K x M
  Mat dpsi_dt;              // K x M
  std::vector<Mat> grad_x;  // n entries, each K x M
  Mat lap_x;                // K x M
};
SpacetimeEval eval_spacetime(const PlaneWaveEnsemble& ens, const Vec& t, const Mat& X);

// ---- tape integration ----

struct EnsembleBinding {
  ad::Var W;      // K x n
  ad::Var b_row;  // 1 x K
  ad::Var kappa;  // K x 1; invalid in stationary mode
};

EnsembleBinding bind_ensemble(ad::Tape& tape, const PlaneWaveEnsemble& ens,
                              bool requires_grad);

/// Phase matrix Z(m,k) = w_k . x_m [+ kappa_k t_m] + b_k for samples X on the
/// tape. Pass times=nullptr in stationary mode.
ad::Var phase_matrix(ad::Tape& tape, const EnsembleBinding& binding, ad::Var X,
                     const Vec* times);

/// d(loss)/d(eta) in the flat [W, b, kappa] layout after tape.backward().
Vec gather_grad_ensemble(const ad::Tape& tape, const PlaneWaveEnsemble& ens,
                         const EnsembleBinding& binding);

}  // namespace mfp
