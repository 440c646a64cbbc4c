#include "mfp/ensemble.hpp"

#include <cmath>

namespace mfp {

Eigen::Index PlaneWaveEnsemble::flat_size() const {
  return W.size() + b.size() + kappa.size();
}

Vec PlaneWaveEnsemble::flat() const {
  Vec eta(flat_size());
  Eigen::Index off = 0;
  for (Eigen::Index k = 0; k < W.rows(); ++k)
    for (Eigen::Index j = 0; j < W.cols(); ++j) eta(off++) = W(k, j);
  eta.segment(off, b.size()) = b;
  off += b.size();
  if (kappa.size() > 0) eta.segment(off, kappa.size()) = kappa;
  return eta;
}

void PlaneWaveEnsemble::set_flat(const Vec& eta) {
  if (eta.size() != flat_size())
    throw std::invalid_argument("PlaneWaveEnsemble::set_flat: length mismatch");
  Eigen::Index off = 0;
  for (Eigen::Index k = 0; k < W.rows(); ++k)
    for (Eigen::Index j = 0; j < W.cols(); ++j) W(k, j) = eta(off++);
  b = eta.segment(off, b.size());
  off += b.size();
  if (kappa.size() > 0) kappa = eta.segment(off, kappa.size());
}

void PlaneWaveEnsemble::validate() const {
  if (W.rows() < 1) throw std::invalid_argument("ensemble: K must be >= 1");
  if (b.size() != W.rows()) throw std::invalid_argument("ensemble: b length != K");
  if (kappa.size() > 0 && kappa.size() != W.rows())
    throw std::invalid_argument("ensemble: kappa length != K");
  check_finite(W, "ensemble W");
  check_finite(b, "ensemble b");
  if (kappa.size() > 0) check_finite(kappa, "ensemble kappa");
}

double default_frequency_scale(double lambda, double sigma, int n) {
  if (lambda <= 0 || sigma <= 0 || n < 1)
    throw std::invalid_argument("default_frequency_scale: inputs must be positive");
  return std::sqrt(2.0 * lambda) / (sigma * std::sqrt(static_cast<double>(n)));
}

PlaneWaveEnsemble init_ensemble(int K, int n, double sigma_w, BiasMode bias_mode,
                                std::optional<double> kappa_scale, std::uint64_t seed) {
  if (K < 1 || n < 1) throw std::invalid_argument("init_ensemble: K and n must be >= 1");
  if (sigma_w <= 0) throw std::invalid_argument("init_ensemble: sigma_w must be positive");
  if (kappa_scale && *kappa_scale < 0)
    throw std::invalid_argument("init_ensemble: kappa_scale must be >= 0");

  RngStream rng(seed, stream_id::ensemble);
  PlaneWaveEnsemble ens;
  ens.W = sigma_w * rng.normal_matrix(K, n);
  ens.b = Vec::Zero(K);
  if (bias_mode == BiasMode::UniformPhase)
    for (int k = 0; k < K; ++k) ens.b(k) = rng.uniform(0.0, 2.0 * M_PI);
  if (kappa_scale) ens.kappa = *kappa_scale * rng.normal_vector(K);
  return ens;
}

StationaryEval eval_stationary(const PlaneWaveEnsemble& ens, const Mat& X) {
  if (X.cols() != ens.dim())
    throw std::invalid_argument("eval_stationary: X cols != ensemble dim");
  const int n = ens.dim();
  StationaryEval out;
  Mat Z = (ens.W * X.transpose()).colwise() + ens.b;  // K x M
  out.f = Z.array().sin();
  Mat C = Z.array().cos();
  out.grad.reserve(n);
  for (int j = 0; j < n; ++j)
    out.grad.push_back(C.array().colwise() * ens.W.col(j).array());
  out.lap = -(out.f.array().colwise() * ens.W.rowwise().squaredNorm().array());
  return out;
}

SpacetimeEval eval_spacetime(const PlaneWaveEnsemble& ens, const Vec& t, const Mat& X) {
  if (!ens.time_dependent())
    throw std::invalid_argument("eval_spacetime: ensemble has no time frequencies");
  if (X.cols() != ens.dim() || t.size() != X.rows())
    throw std::invalid_argument("eval_spacetime: shape mismatch");
  const int n = ens.dim();
  SpacetimeEval out;
  Mat Z = (ens.W * X.transpose()).colwise() + ens.b;  // K x M
  Z += ens.kappa * t.transpose();
  out.psi = Z.array().sin();
  Mat C = Z.array().cos();
  out.dpsi_dt = C.array().colwise() * ens.kappa.array();
  out.grad_x.reserve(n);
  for (int j = 0; j < n; ++j)
    out.grad_x.push_back(C.array().colwise() * ens.W.col(j).array());
  out.lap_x = -(out.psi.array().colwise() * ens.W.rowwise().squaredNorm().array());
  return out;
}

EnsembleBinding bind_ensemble(ad::Tape& tape, const PlaneWaveEnsemble& ens,
                              bool requires_grad) {
  EnsembleBinding binding;
  binding.W = tape.leaf(ens.W, requires_grad);
  binding.b_row = tape.leaf(ens.b.transpose(), requires_grad);
  if (ens.time_dependent()) binding.kappa = tape.leaf(ens.kappa, requires_grad);
  return binding;
}

ad::Var phase_matrix(ad::Tape& tape, const EnsembleBinding& binding, ad::Var X,
                     const Vec* times) {
  ad::Var Z = tape.add_row(tape.matmul_nt(X, binding.W), binding.b_row);
  if (times) {
    if (!binding.kappa.valid())
      throw std::invalid_argument("phase_matrix: times given but ensemble is stationary");
    ad::Var t_col = tape.leaf(*times, false);  // M x 1 data
    Z = tape.add(Z, tape.matmul_nt(t_col, binding.kappa));
  }
  return Z;
}

Vec gather_grad_ensemble(const ad::Tape& tape, const PlaneWaveEnsemble& ens,
                         const EnsembleBinding& binding) {
  Vec g(ens.flat_size());
  Eigen::Index off = 0;
  const Mat gW = tape.grad(binding.W);
  for (Eigen::Index k = 0; k < gW.rows(); ++k)
    for (Eigen::Index j = 0; j < gW.cols(); ++j) g(off++) = gW(k, j);
  const Mat gb = tape.grad(binding.b_row);  // 1 x K
  for (Eigen::Index k = 0; k < gb.cols(); ++k) g(off++) = gb(0, k);
  if (ens.time_dependent()) {
    const Mat gk = tape.grad(binding.kappa);  // K x 1
    for (Eigen::Index k = 0; k < gk.rows(); ++k) g(off++) = gk(k, 0);
  }
  return g;
}

}  // namespace mfp
