#include "mfp/timedep.hpp"

#include <chrono>
#include <cmath>

#include "mfp/detail/kernels.hpp"
#include "mfp/optim.hpp"

namespace mfp {

void TimeTrainConfig::validate(const ProblemSpec& spec) const {
  if (N_T < 1 || M_per < 1 || M_0 < 1 || M_T < 1 || K < 1)
    throw std::invalid_argument("time train config: batch sizes must be positive");
  if (epochs < 0) throw std::invalid_argument("time train config: epochs must be >= 0");
  if (lr_gen <= 0 || lr_test <= 0)
    throw std::invalid_argument("time train config: learning rates must be positive");
  if (adversary_period < 1)
    throw std::invalid_argument("time train config: adversary_period must be >= 1");
  if (ew_mode == EwMode::BatchMean && spec.kernel != KernelType::Quadratic)
    throw std::invalid_argument(
        "time train config: BatchMean interaction closure is only valid for the quadratic kernel");
  if (ew_mode == EwMode::SecondarySample && M_W < 1)
    throw std::invalid_argument("time train config: SecondarySample requires M_W >= 1");
}

Vec assemble_residual(const ResidualBreakdown& b) {
  return b.E_T - b.E_0 - b.E_t + b.E_V + b.E_W - b.E_D;
}

double assemble_and_loss(ResidualBreakdown& b) {
  b.residual = assemble_residual(b);
  return b.residual.squaredNorm() / static_cast<double>(b.residual.size());
}

Vec equispaced_midpoint_nodes(int N_T, double T) {
  Vec nodes(N_T);
  for (int i = 0; i < N_T; ++i) nodes(i) = (i + 0.5) * T / N_T;
  return nodes;
}

namespace {

// Phase rows Z(m,k) = w_k . x_m + kappa_k t_m + b_k (kappa skipped when t == nullptr).
Mat plain_phase(const PlaneWaveEnsemble& ens, const Mat& X, const Vec* t) {
  Mat Z = X * ens.W.transpose();
  Z.rowwise() += ens.b.transpose();
  if (t) {
    if (!ens.time_dependent())
      throw std::invalid_argument("phase: times given for a stationary ensemble");
    Z += *t * ens.kappa.transpose();
  }
  return Z;
}

Mat kernel_gradient_rows(const ProblemSpec& spec, const Mat& Zd) {
  switch (spec.kernel) {
    case KernelType::Quadratic:
      return Zd;
    case KernelType::MollifiedLog: {
      const double e2 = spec.kernel_eps * spec.kernel_eps;
      Vec denom = Zd.rowwise().squaredNorm().array() + e2;
      return -(Zd.array().colwise() / denom.array());
    }
  }
  throw std::logic_error("unknown kernel");
}

}  // namespace

Vec estimate_E0(const PlaneWaveEnsemble& ens, const Mat& X0) {
  if (X0.rows() == 0) throw std::invalid_argument("estimate_E0: empty batch");
  if (X0.cols() != ens.dim()) throw std::invalid_argument("estimate_E0: shape mismatch");
  return plain_phase(ens, X0, nullptr).array().sin().colwise().mean().transpose();
}

Vec estimate_ET_samples(const PlaneWaveEnsemble& ens, double T, const Mat& XT) {
  if (XT.rows() == 0) throw std::invalid_argument("estimate_ET: empty batch");
  const Vec tT = Vec::Constant(XT.rows(), T);
  return plain_phase(ens, XT, &tT).array().sin().colwise().mean().transpose();
}

Vec estimate_ET(const TimeMap& map, const PlaneWaveEnsemble& ens, double T,
                const Mat& X0_T, const Mat& R_T) {
  const Vec tT = Vec::Constant(X0_T.rows(), T);
  return estimate_ET_samples(ens, T, push_time(map, tT, X0_T, R_T));
}

Vec per_node_mean(const TimeMap& map, double t, const Mat& X0, const Mat& R) {
  const Vec tv = Vec::Constant(X0.rows(), t);
  return batch_mean(push_time(map, tv, X0, R));
}

InteriorEstimates interior_estimate_samples(const PlaneWaveEnsemble& ens,
                                            const ProblemSpec& spec, const Vec& nodes,
                                            const std::vector<Mat>& X_nodes) {
  if (static_cast<Eigen::Index>(X_nodes.size()) != nodes.size())
    throw std::invalid_argument("interior_estimate: node/batch count mismatch");
  const int K = ens.size();
  const double T = spec.T;
  const double theta = spec.theta;
  const double half_s2 = 0.5 * spec.sigma * spec.sigma;
  const Eigen::RowVectorXd w2 = ens.W.rowwise().squaredNorm().transpose();

  InteriorEstimates out;
  out.E_t = Vec::Zero(K);
  out.E_V = Vec::Zero(K);
  out.E_D = Vec::Zero(K);
  out.E_W_batchmean = Vec::Zero(K);

  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const Mat& X = X_nodes[i];
    if (X.rows() == 0) throw std::invalid_argument("interior_estimate: empty node batch");
    const Vec ti = Vec::Constant(X.rows(), nodes(i));
    Mat Z = plain_phase(ens, X, &ti);
    Mat S, C;
    detail::sincos_matrix(Z, S, C);
    const Eigen::RowVectorXd m_hat = X.colwise().mean();
    out.E_t += (C.array().rowwise() * ens.kappa.transpose().array())
                   .colwise().mean().matrix().transpose();
    out.E_V += ((theta * X * ens.W.transpose()).cwiseProduct(C))
                   .colwise().mean().transpose();
    out.E_D += (-half_s2) *
               (S.array().rowwise() * w2.array()).colwise().mean().matrix().transpose();
    Mat Xc = X.rowwise() - m_hat;
    out.E_W_batchmean +=
        ((Xc * ens.W.transpose()).cwiseProduct(C)).colwise().mean().transpose();
  }
  const double quad = T / static_cast<double>(nodes.size());
  out.E_t *= quad;
  out.E_V *= quad;
  out.E_D *= quad;
  out.E_W_batchmean *= quad;
  return out;
}

InteriorEstimates interior_estimate(const TimeMap& map, const PlaneWaveEnsemble& ens,
                                    const ProblemSpec& spec, const Vec& nodes,
                                    const std::vector<Mat>& X0_nodes,
                                    const std::vector<Mat>& R_nodes) {
  if (X0_nodes.size() != R_nodes.size() ||
      static_cast<Eigen::Index>(X0_nodes.size()) != nodes.size())
    throw std::invalid_argument("interior_estimate: node/batch count mismatch");
  std::vector<Mat> X_nodes;
  X_nodes.reserve(X0_nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const Vec ti = Vec::Constant(X0_nodes[i].rows(), nodes(i));
    X_nodes.push_back(push_time(map, ti, X0_nodes[i], R_nodes[i]));
  }
  return interior_estimate_samples(ens, spec, nodes, X_nodes);
}

Vec estimate_EW_secondary(const PlaneWaveEnsemble& ens, const ProblemSpec& spec,
                          const Vec& times, const Mat& Xi, const Mat& Eta) {
  if (Xi.rows() != Eta.rows() || Xi.rows() != times.size() || Xi.cols() != Eta.cols())
    throw std::invalid_argument("estimate_EW_secondary: shape mismatch");
  if (Xi.rows() == 0) throw std::invalid_argument("estimate_EW_secondary: empty batch");
  Mat Z = plain_phase(ens, Xi, &times);
  Mat C = Z.array().cos();
  Mat G = kernel_gradient_rows(spec, Xi - Eta);
  return spec.T * ((G * ens.W.transpose()).cwiseProduct(C)).colwise().mean().transpose();
}

TimedepStreams::TimedepStreams(std::uint64_t seed)
    : x0_interior(seed, stream_id::x0_interior),
      base_interior(seed, stream_id::base_interior),
      x0_terminal(seed, stream_id::x0_terminal),
      base_terminal(seed, stream_id::base_terminal),
      initial(seed, stream_id::initial_batch),
      time_interaction(seed, stream_id::time_interaction),
      x0_interaction(seed, stream_id::x0_interaction),
      base_interaction(seed, stream_id::base_interaction) {}

TimedepBatches draw_batches(const TimeMap& map, const ProblemSpec& spec,
                            const TimeTrainConfig& cfg, TimedepStreams& streams) {
  TimedepBatches b;
  b.nodes = equispaced_midpoint_nodes(cfg.N_T, spec.T);
  b.X0_terminal = sample_initial(spec, cfg.M_T, streams.x0_terminal);
  b.R_terminal = sample_base(map.base, cfg.M_T, streams.base_terminal);
  b.X0_initial = sample_initial(spec, cfg.M_0, streams.initial);
  b.X0_interior = sample_initial(spec, cfg.M(), streams.x0_interior);
  b.R_interior = sample_base(map.base, cfg.M(), streams.base_interior);
  if (cfg.ew_mode == EwMode::SecondarySample) {
    b.t_interaction.resize(cfg.M_W);
    for (int m = 0; m < cfg.M_W; ++m)
      b.t_interaction(m) = streams.time_interaction.uniform(0.0, spec.T);
    b.X0_xi = sample_initial(spec, cfg.M_W, streams.x0_interaction);
    b.X0_eta = sample_initial(spec, cfg.M_W, streams.x0_interaction);
    b.R_xi = sample_base(map.base, cfg.M_W, streams.base_interaction);
    b.R_eta = sample_base(map.base, cfg.M_W, streams.base_interaction);
  }
  return b;
}

TimedepLossVars build_timedep_loss(ad::Tape& tape, const TimeMap& map,
                                   const MlpBinding& mlp_binding,
                                   const EnsembleBinding& ens_binding,
                                   const ProblemSpec& spec, const TimeTrainConfig& cfg,
                                   const TimedepBatches& batches) {
  const double T = spec.T;
  const double theta = spec.theta;
  const double half_s2 = 0.5 * spec.sigma * spec.sigma;
  const int M_per = cfg.M_per;

  TimedepLossVars v;
  ad::Var w2t = tape.transpose(tape.rowsum(tape.square(ens_binding.W)));

  // Interior: tensor-product batch, node-major blocks of M_per rows.
  Vec t_int(batches.X0_interior.rows());
  for (int i = 0; i < cfg.N_T; ++i)
    t_int.segment(static_cast<Eigen::Index>(i) * M_per, M_per).setConstant(batches.nodes(i));
  ad::Var X = build_push_time(tape, map, mlp_binding, t_int, batches.X0_interior,
                              batches.R_interior);
  ad::Var Z = phase_matrix(tape, ens_binding, X, &t_int);
  auto [S, C] = tape.sincos(Z);

  v.E_t = tape.scale(tape.colmean(tape.mul_row(C, tape.transpose(ens_binding.kappa))), T);
  v.E_V = tape.scale(
      tape.colmean(tape.mul(tape.matmul_nt(tape.scale(X, theta), ens_binding.W), C)), T);
  v.E_D = tape.scale(tape.colmean(tape.mul_row(S, w2t)), -half_s2 * T);

  if (cfg.ew_mode == EwMode::BatchMean) {
    // Per-node means close the mean-field term; gradient flows through them.
    ad::Var m_nodes = tape.block_colmean(X, M_per);
    ad::Var m_rep = tape.repeat_rows(m_nodes, M_per);
    ad::Var Xc = tape.sub(X, m_rep);
    v.E_W = tape.scale(tape.colmean(tape.mul(tape.matmul_nt(Xc, ens_binding.W), C)), T);
  } else {
    ad::Var Xi = build_push_time(tape, map, mlp_binding, batches.t_interaction,
                                 batches.X0_xi, batches.R_xi);
    ad::Var Eta = build_push_time(tape, map, mlp_binding, batches.t_interaction,
                                  batches.X0_eta, batches.R_eta);
    ad::Var Zxi = phase_matrix(tape, ens_binding, Xi, &batches.t_interaction);
    auto [Sxi, Cxi] = tape.sincos(Zxi);
    (void)Sxi;
    ad::Var Zd = tape.sub(Xi, Eta);
    ad::Var G;
    if (spec.kernel == KernelType::Quadratic) {
      G = Zd;
    } else {
      ad::Var denom = tape.add_scalar(tape.rowsum(tape.square(Zd)),
                                      spec.kernel_eps * spec.kernel_eps);
      G = tape.scale(tape.mul_col(Zd, tape.recip(denom)), -1.0);
    }
    v.E_W = tape.scale(tape.colmean(tape.mul(tape.matmul_nt(G, ens_binding.W), Cxi)), T);
  }

  // Terminal: pushed samples at t = T.
  const Vec tT = Vec::Constant(batches.X0_terminal.rows(), T);
  ad::Var XT = build_push_time(tape, map, mlp_binding, tT, batches.X0_terminal,
                               batches.R_terminal);
  ad::Var ZT = phase_matrix(tape, ens_binding, XT, &tT);
  auto [ST, CT] = tape.sincos(ZT);
  (void)CT;
  v.E_T = tape.colmean(ST);

  // Initial: psi(0, x0) over x0 ~ rho0; no pushforward dependence (kappa * 0 = 0).
  ad::Var X0 = tape.leaf(batches.X0_initial, false);
  ad::Var Z0 = phase_matrix(tape, ens_binding, X0, nullptr);
  auto [S0, C0] = tape.sincos(Z0);
  (void)C0;
  v.E_0 = tape.colmean(S0);

  v.residual = tape.sub(
      tape.add(tape.sub(tape.sub(v.E_T, v.E_0), v.E_t), tape.add(v.E_V, v.E_W)), v.E_D);
  v.loss = tape.mean(tape.square(v.residual));
  return v;
}

ResidualBreakdown breakdown_values(const ad::Tape& tape, const TimedepLossVars& vars) {
  ResidualBreakdown b;
  b.E_T = tape.value(vars.E_T).transpose();
  b.E_0 = tape.value(vars.E_0).transpose();
  b.E_t = tape.value(vars.E_t).transpose();
  b.E_V = tape.value(vars.E_V).transpose();
  b.E_W = tape.value(vars.E_W).transpose();
  b.E_D = tape.value(vars.E_D).transpose();
  b.residual = tape.value(vars.residual).transpose();
  return b;
}

TrainReport train_timedep(TimeMap& map, PlaneWaveEnsemble& ens, const ProblemSpec& spec,
                          const TimeTrainConfig& cfg) {
  spec.validate();
  cfg.validate(spec);
  ens.validate();
  if (!ens.time_dependent())
    throw std::invalid_argument("train_timedep: ensemble must carry time frequencies");
  if (ens.dim() != spec.n || map.n != spec.n)
    throw std::invalid_argument("train_timedep: dimension mismatch");
  if (ens.size() != cfg.K)
    throw std::invalid_argument("train_timedep: ensemble size != cfg.K");

  const auto t_start = std::chrono::steady_clock::now();
  TimedepStreams streams(cfg.seed);
  AdamState adam(map.params.size());

  TrainReport report;
  report.loss_history.reserve(cfg.epochs);
  ad::Tape tape;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const TimedepBatches batches = draw_batches(map, spec, cfg, streams);
    const bool adversary_epoch = (epoch + 1) % cfg.adversary_period == 0;

    tape.clear();
    MlpBinding mb = bind_params(tape, map.params, true);
    EnsembleBinding eb = bind_ensemble(tape, ens, adversary_epoch);
    TimedepLossVars vars = build_timedep_loss(tape, map, mb, eb, spec, cfg, batches);

    const double loss_value = tape.value(vars.loss)(0, 0);
    report.loss_history.push_back(loss_value);
    if (!std::isfinite(loss_value) || loss_value > cfg.divergence_threshold)
      throw TrainingDiverged(epoch, loss_value);

    tape.backward(vars.loss);
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

  // Final sample statistics at the horizon.
  RngStream eval_rng(cfg.seed, stream_id::evaluation);
  const int M_eval = 10000;
  const Mat X0 = sample_initial(spec, M_eval, eval_rng);
  const Mat R = sample_base(map.base, M_eval, eval_rng);
  const Mat X = push_time(map, Vec::Constant(M_eval, spec.T), X0, R);
  report.sample_mean = X.colwise().mean();
  Mat centered = X.rowwise() - report.sample_mean.transpose();
  report.sample_std =
      (centered.colwise().squaredNorm() / static_cast<double>(M_eval - 1))
          .cwiseSqrt()
          .transpose();
  return report;
}

}  // namespace mfp
