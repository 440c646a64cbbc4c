#include "mfp/stationary.hpp"

#include <chrono>
#include <cmath>

#include "mfp/detail/kernels.hpp"
#include "mfp/optim.hpp"

namespace mfp {

void StationaryTrainConfig::validate() const {
  if (M < 1 || K < 1) throw std::invalid_argument("train config: M and K must be positive");
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (lr_gen <= 0 || lr_test <= 0)
    throw std::invalid_argument("train config: learning rates must be positive");
  if (adversary_period < 1)
    throw std::invalid_argument("train config: adversary_period must be >= 1");
}

Vec batch_mean(const Mat& X) {
  if (X.rows() == 0) throw std::invalid_argument("batch_mean: empty batch");
  return X.colwise().mean();
}

Vec stationary_residuals(const Mat& X, const Vec& m_hat, const PlaneWaveEnsemble& ens,
                         const ProblemSpec& spec) {
  if (spec.kernel != KernelType::Quadratic)
    throw std::invalid_argument(
        "stationary_residuals: stationary solver uses the quadratic kernel");
  if (X.cols() != ens.dim() || X.cols() != spec.n || m_hat.size() != spec.n)
    throw std::invalid_argument("stationary_residuals: shape mismatch");
  const Eigen::Index M = X.rows();
  if (M == 0) throw std::invalid_argument("stationary_residuals: empty batch");

  const double lam = spec.lambda();
  const double half_s2 = 0.5 * spec.sigma * spec.sigma;
  const Eigen::RowVectorXd w2 = half_s2 * ens.W.rowwise().squaredNorm().transpose();
  const Eigen::RowVectorXd mh = m_hat.transpose();

  // Chunked over samples so oracle-scale batches (M ~ 1e5) stay in memory.
  const Eigen::Index chunk = 16384;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(ens.size());
  Mat Z, S, C;
  for (Eigen::Index r0 = 0; r0 < M; r0 += chunk) {
    const Eigen::Index rows = std::min(chunk, M - r0);
    const auto Xc = X.middleRows(r0, rows);
    Z.noalias() = Xc * ens.W.transpose();
    Z.rowwise() += ens.b.transpose();
    detail::sincos_matrix(Z, S, C);
    Mat D = (-lam) * Xc;
    D.rowwise() += mh;
    Mat A;
    A.noalias() = D * ens.W.transpose();
    acc += (A.cwiseProduct(C) - (S.array().rowwise() * w2.array()).matrix())
               .colwise()
               .sum();
  }
  return acc.transpose() / static_cast<double>(M);
}

double stationary_loss(const Vec& residuals) {
  if (residuals.size() == 0) throw std::invalid_argument("stationary_loss: empty residuals");
  return residuals.squaredNorm() / static_cast<double>(residuals.size());
}

ad::Var build_stationary_loss(ad::Tape& tape, const StationaryMap& map,
                              const MlpBinding& mlp_binding,
                              const EnsembleBinding& ens_binding,
                              const ProblemSpec& spec, const Mat& R_base) {
  if (spec.kernel != KernelType::Quadratic)
    throw std::invalid_argument("stationary loss: quadratic kernel required");
  const double lam = spec.lambda();
  const double half_s2 = 0.5 * spec.sigma * spec.sigma;

  ad::Var X = build_push_stationary(tape, map, mlp_binding, R_base);
  ad::Var m_hat = tape.colmean(X);  // gradient flows through the batch mean
  ad::Var drift = tape.add_row(tape.scale(X, -lam), m_hat);

  ad::Var Z = phase_matrix(tape, ens_binding, X, nullptr);
  auto [S, C] = tape.sincos(Z);
  ad::Var drift_dot_grad = tape.mul(tape.matmul_nt(drift, ens_binding.W), C);
  ad::Var w2t = tape.transpose(tape.rowsum(tape.square(ens_binding.W)));
  ad::Var diffusion = tape.mul_row(S, tape.scale(w2t, half_s2));
  ad::Var integrand = tape.sub(drift_dot_grad, diffusion);
  ad::Var residuals = tape.colmean(integrand);
  return tape.mean(tape.square(residuals));
}

TrainReport train_stationary(StationaryMap& map, PlaneWaveEnsemble& ens,
                             const ProblemSpec& spec, const StationaryTrainConfig& cfg) {
  cfg.validate();
  spec.validate();
  ens.validate();
  if (ens.time_dependent())
    throw std::invalid_argument("train_stationary: ensemble must be stationary (no kappa)");
  if (ens.dim() != spec.n || map.n() != spec.n)
    throw std::invalid_argument("train_stationary: dimension mismatch");
  if (ens.size() != cfg.K)
    throw std::invalid_argument("train_stationary: ensemble size != cfg.K");

  const auto t_start = std::chrono::steady_clock::now();
  RngStream base_rng(cfg.seed, stream_id::base_interior);
  AdamState adam(map.params.size());

  TrainReport report;
  report.loss_history.reserve(cfg.epochs);
  ad::Tape tape;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Mat R = sample_base(map.base, cfg.M, base_rng);
    const bool adversary_epoch = (epoch + 1) % cfg.adversary_period == 0;

    tape.clear();
    MlpBinding mb = bind_params(tape, map.params, true);
    EnsembleBinding eb = bind_ensemble(tape, ens, adversary_epoch);
    ad::Var loss = build_stationary_loss(tape, map, mb, eb, spec, R);

    const double loss_value = tape.value(loss)(0, 0);
    report.loss_history.push_back(loss_value);
    if (!std::isfinite(loss_value) || loss_value > cfg.divergence_threshold)
      throw TrainingDiverged(epoch, loss_value);

    tape.backward(loss);
    const Vec g = gather_grad(tape, map.spec, mb);
    adam_step(map.params.flat(), g, adam, cfg.lr_gen);
    if (adversary_epoch) {
      Vec eta = ens.flat();
      sgd_ascent_step(eta, gather_grad_ensemble(tape, ens, eb), cfg.lr_test);
      ens.set_flat(eta);
    }
  }
  tape.clear();

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!report.loss_history.empty()) report.final_loss = report.loss_history.back();

  RngStream eval_rng(cfg.seed, stream_id::evaluation);
  const Mat X = push_stationary(map, sample_base(map.base, 10000, eval_rng));
  report.sample_mean = X.colwise().mean();
  Mat centered = X.rowwise() - report.sample_mean.transpose();
  report.sample_std =
      (centered.colwise().squaredNorm() / static_cast<double>(X.rows() - 1))
          .cwiseSqrt()
          .transpose();
  return report;
}

}  // namespace mfp
