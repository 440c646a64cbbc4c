#include "mfp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfp/ensemble.hpp"
#include "mfp/metrics.hpp"
#include "mfp/mlp.hpp"
#include "mfp/particle.hpp"
#include "mfp/problem.hpp"
#include "mfp/pushforward.hpp"
#include "mfp/stationary.hpp"
#include "mfp/timedep.hpp"

namespace mfp {
namespace {

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Suite: gradients (criterion: reverse mode == central finite differences)
// ---------------------------------------------------------------------------

// err_i = |ad - fd| / max(|ad|, |fd|, floor); the floor keeps near-zero
// entries from amplifying the finite-difference noise floor.
double max_rel_err(const Vec& ad, const Vec& fd, double floor = 1e-4) {
  double worst = 0;
  for (Eigen::Index i = 0; i < ad.size(); ++i) {
    const double denom = std::max({std::abs(ad(i)), std::abs(fd(i)), floor});
    worst = std::max(worst, std::abs(ad(i) - fd(i)) / denom);
  }
  return worst;
}

constexpr double kFdStep = 1e-6;

template <typename LossFn>
Vec fd_gradient(Vec flat, const LossFn& loss_of_flat) {
  Vec g(flat.size());
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double saved = flat(i);
    flat(i) = saved + kFdStep;
    const double up = loss_of_flat(flat);
    flat(i) = saved - kFdStep;
    const double down = loss_of_flat(flat);
    flat(i) = saved;
    g(i) = (up - down) / (2.0 * kFdStep);
  }
  return g;
}

struct GradCase {
  std::string name;
  double theta_err = 0;
  double eta_err = 0;
};

GradCase gradcheck_stationary() {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;

  MlpSpec net{3, {6}, 2};
  BaseDist base{BaseDistType::UniformUnitCube, 3};
  StationaryMap map(net, base, 5);
  PlaneWaveEnsemble ens = init_ensemble(7, 2, 1.3, BiasMode::UniformPhase, std::nullopt, 11);
  RngStream rng(7, stream_id::base_interior);
  const Mat R = sample_base(base, 16, rng);

  auto loss_at = [&](const MlpParams& params, const PlaneWaveEnsemble& e) {
    ad::Tape tape;
    StationaryMap m = map;
    m.params = params;
    MlpBinding mb = bind_params(tape, params, false);
    EnsembleBinding eb = bind_ensemble(tape, e, false);
    return tape.value(build_stationary_loss(tape, m, mb, eb, spec, R))(0, 0);
  };

  ad::Tape tape;
  MlpBinding mb = bind_params(tape, map.params, true);
  EnsembleBinding eb = bind_ensemble(tape, ens, true);
  ad::Var loss = build_stationary_loss(tape, map, mb, eb, spec, R);
  tape.backward(loss);
  const Vec ad_theta = gather_grad(tape, net, mb);
  const Vec ad_eta = gather_grad_ensemble(tape, ens, eb);

  const Vec fd_theta = fd_gradient(map.params.flat(), [&](const Vec& flat) {
    MlpParams p(net);
    p.flat() = flat;
    return loss_at(p, ens);
  });
  const Vec fd_eta = fd_gradient(ens.flat(), [&](const Vec& flat) {
    PlaneWaveEnsemble e = ens;
    e.set_flat(flat);
    return loss_at(map.params, e);
  });
  return {"stationary loss (incl. batch mean)", max_rel_err(ad_theta, fd_theta),
          max_rel_err(ad_eta, fd_eta)};
}

GradCase gradcheck_timedep(EwMode mode, KernelType kernel, const std::string& label) {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  spec.T = 1.0;
  spec.kernel = kernel;
  if (kernel == KernelType::MollifiedLog) spec.kernel_eps = 0.35;
  spec.mu0 = Vec(2);
  spec.mu0 << 1.5, -0.5;

  TimeTrainConfig cfg;
  cfg.N_T = 3;
  cfg.M_per = 5;
  cfg.M_0 = 6;
  cfg.M_T = 6;
  cfg.M_W = 8;
  cfg.K = 5;
  cfg.ew_mode = mode;
  cfg.seed = 13;

  MlpSpec net{4, {6}, 2};  // input [t, r] with d = 3
  BaseDist base{BaseDistType::StandardGaussian, 3};
  TimeMap map(net, base, 2, false, 9);
  PlaneWaveEnsemble ens = init_ensemble(cfg.K, 2, 0.9, BiasMode::UniformPhase, 0.8, 15);

  TimedepStreams streams(cfg.seed);
  const TimedepBatches batches = draw_batches(map, spec, cfg, streams);

  auto loss_at = [&](const MlpParams& params, const PlaneWaveEnsemble& e) {
    ad::Tape tape;
    TimeMap m = map;
    m.params = params;
    MlpBinding mb = bind_params(tape, params, false);
    EnsembleBinding eb = bind_ensemble(tape, e, false);
    return tape.value(build_timedep_loss(tape, m, mb, eb, spec, cfg, batches).loss)(0, 0);
  };

  ad::Tape tape;
  MlpBinding mb = bind_params(tape, map.params, true);
  EnsembleBinding eb = bind_ensemble(tape, ens, true);
  TimedepLossVars vars = build_timedep_loss(tape, map, mb, eb, spec, cfg, batches);
  tape.backward(vars.loss);
  const Vec ad_theta = gather_grad(tape, net, mb);
  const Vec ad_eta = gather_grad_ensemble(tape, ens, eb);

  const Vec fd_theta = fd_gradient(map.params.flat(), [&](const Vec& flat) {
    MlpParams p(net);
    p.flat() = flat;
    return loss_at(p, ens);
  });
  const Vec fd_eta = fd_gradient(ens.flat(), [&](const Vec& flat) {
    PlaneWaveEnsemble e = ens;
    e.set_flat(flat);
    return loss_at(map.params, e);
  });
  return {label, max_rel_err(ad_theta, fd_theta), max_rel_err(ad_eta, fd_eta)};
}

std::vector<CheckResult> suite_gradients() {
  std::vector<GradCase> cases;
  cases.push_back(gradcheck_stationary());
  cases.push_back(gradcheck_timedep(EwMode::BatchMean, KernelType::Quadratic,
                                    "transient loss, batch-mean closure"));
  cases.push_back(gradcheck_timedep(EwMode::SecondarySample, KernelType::Quadratic,
                                    "transient loss, secondary-sample E_W (quadratic)"));
  cases.push_back(gradcheck_timedep(EwMode::SecondarySample, KernelType::MollifiedLog,
                                    "transient loss, secondary-sample E_W (mollified log)"));

  std::vector<CheckResult> results;
  for (const auto& c : cases) {
    const double err = std::max(c.theta_err, c.eta_err);
    results.push_back({"gradients: " + c.name, err < 1e-5,
                       "max rel err " + fmt(err) + " (params " + fmt(c.theta_err) +
                           ", adversary " + fmt(c.eta_err) + ")"});
  }
  return results;
}

// ---------------------------------------------------------------------------
// Suite: residual-decay (oracle Gaussian samples, loss ~ 1/M)
// ---------------------------------------------------------------------------

std::vector<CheckResult> suite_residual_decay() {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  const double std_exact = std::sqrt(stationary_moments(spec).second);

  PlaneWaveEnsemble ens = init_ensemble(256, 2, 2.0, BiasMode::UniformPhase, std::nullopt, 21);
  RngStream rng(22, stream_id::evaluation);

  const std::vector<int> sizes = {1000, 10000, 100000};
  const int reps = 6;
  std::vector<double> avg_loss;
  for (int M : sizes) {
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
      const Mat X = std_exact * rng.normal_matrix(M, 2);
      acc += stationary_loss(stationary_residuals(X, batch_mean(X), ens, spec));
    }
    avg_loss.push_back(acc / reps);
  }

  // Least-squares slope of log10(loss) vs log10(M).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log10(static_cast<double>(sizes[i]));
    const double y = std::log10(avg_loss[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double np = static_cast<double>(sizes.size());
  const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);

  std::ostringstream detail;
  detail << "slope " << fmt(slope) << " (losses " << fmt(avg_loss[0]) << ", "
         << fmt(avg_loss[1]) << ", " << fmt(avg_loss[2]) << ")";
  return {{"residual-decay: oracle-sample loss fits log-log slope -1 +- 0.2",
           slope > -1.2 && slope < -0.8, detail.str()}};
}

// ---------------------------------------------------------------------------
// Suite: spurious-minimizer (two-point law vs exact Gaussian)
// ---------------------------------------------------------------------------

std::vector<CheckResult> suite_spurious() {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  const double a = std::sqrt(stationary_moments(spec).second);  // 0.5: atom coordinate

  const int K = 2000;
  const int M = 1000;
  const int reps = 5;

  auto mean_loss = [&](double sigma_w, bool two_point, std::uint64_t seed) {
    PlaneWaveEnsemble ens = init_ensemble(K, 2, sigma_w, BiasMode::UniformPhase,
                                          std::nullopt, 23);
    RngStream rng(seed, stream_id::evaluation);
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
      Mat X(M, 2);
      if (two_point) {
        // Symmetric atoms at +-(a, a): mean 0, per-component variance a^2.
        for (int i = 0; i < M; ++i) {
          const double s = rng.uniform() < 0.5 ? -a : a;
          X(i, 0) = s;
          X(i, 1) = s;
        }
      } else {
        X = a * rng.normal_matrix(M, 2);
      }
      acc += stationary_loss(stationary_residuals(X, batch_mean(X), ens, spec));
    }
    return acc / reps;
  };

  std::vector<CheckResult> results;
  {
    const double lg = mean_loss(2.0, false, 31);
    const double lt = mean_loss(2.0, true, 37);
    const double ratio = lt / lg;
    results.push_back({"spurious-minimizer: separation >= 10x at sigma_w = 2.0",
                       ratio >= 10.0,
                       "two-point/Gaussian loss ratio " + fmt(ratio) + " (" + fmt(lt) +
                           " vs " + fmt(lg) + ")"});
  }
  {
    const double lg = mean_loss(0.05, false, 41);
    const double lt = mean_loss(0.05, true, 43);
    const double ratio = lt / lg;
    results.push_back({"spurious-minimizer: separation < 2x at sigma_w = 0.05",
                       ratio < 2.0, "loss ratio " + fmt(ratio)});
  }
  return results;
}

// ---------------------------------------------------------------------------
// Suite: particle (Euler-Maruyama vs closed-form moments)
// ---------------------------------------------------------------------------

double max_moment_error(const MomentTrajectory& traj, const ProblemSpec& spec) {
  const MomentTrajectory exact = exact_moments(spec, traj.times);
  double worst = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    worst = std::max(worst, (traj.means[i] - exact.means[i]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (traj.variances[i] - exact.variances[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<CheckResult> suite_particle() {
  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  spec.mu0 = Vec::Constant(2, 2.0);
  spec.Sigma0 = 0.25;
  const std::vector<double> times = {0.1, 0.5, 1.0};

  const MomentTrajectory big = simulate_particles(spec, 10000, 1e-3, 1.0, 31, times);
  const double err_big = max_moment_error(big, spec);
  const MomentTrajectory small = simulate_particles(spec, 100, 1e-3, 1.0, 32, times);
  const double err_small = max_moment_error(small, spec);

  std::vector<CheckResult> results;
  results.push_back({"particle: N=1e4 moments within 0.05 of closed form",
                     err_big <= 0.05, "max |moment error| " + fmt(err_big)});
  results.push_back({"particle: error grows when N drops to 100", err_small > err_big,
                     "N=100 error " + fmt(err_small) + " vs N=1e4 error " + fmt(err_big)});
  return results;
}

// ---------------------------------------------------------------------------
// Suite: time-sampling (tensor-product vs pooled estimator bias)
// ---------------------------------------------------------------------------

std::vector<CheckResult> suite_time_sampling() {
  ProblemSpec spec;
  spec.n = 1;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  spec.mu0 = Vec::Constant(1, 2.0);
  spec.Sigma0 = 0.25;
  spec.T = 1.0;

  const double m_final = 2.0 * std::exp(-1.0);          // m(1)
  const double m_pooled = 2.0 * (1.0 - std::exp(-1.0)); // (1/T) int m dt

  RngStream rng(51, stream_id::evaluation);
  const int M = 20000;
  auto oracle_draw = [&](double t) {
    const double m = spec.initial_mean()(0) * std::exp(-spec.theta * t);
    const double var = (spec.Sigma0 - 0.25) * std::exp(-2.0 * spec.lambda() * t) + 0.25;
    return m + std::sqrt(var) * rng.normal();
  };

  // Pooled: every sample at its own uniform random time.
  double sum = 0, sumsq = 0;
  for (int i = 0; i < M; ++i) {
    const double x = oracle_draw(rng.uniform(0.0, spec.T));
    sum += x;
    sumsq += x * x;
  }
  const double pooled_mean = sum / M;
  const double pooled_se = std::sqrt((sumsq / M - pooled_mean * pooled_mean) / M);

  // Tensor-product node at t = 1: all samples share the node time.
  sum = 0;
  sumsq = 0;
  for (int i = 0; i < M; ++i) {
    const double x = oracle_draw(1.0);
    sum += x;
    sumsq += x * x;
  }
  const double node_mean = sum / M;
  const double node_se = std::sqrt((sumsq / M - node_mean * node_mean) / M);

  std::vector<CheckResult> results;
  results.push_back({"time-sampling: node estimator recovers m(1) ~ 0.736",
                     std::abs(node_mean - m_final) <= 4 * node_se,
                     "node mean " + fmt(node_mean) + " (se " + fmt(node_se) + ")"});
  results.push_back({"time-sampling: pooled estimator lands on time-average ~ 1.264",
                     std::abs(pooled_mean - m_pooled) <= 4 * pooled_se,
                     "pooled mean " + fmt(pooled_mean) + " (se " + fmt(pooled_se) + ")"});
  results.push_back({"time-sampling: pooled estimator misses m(1) by >= 5 std errs",
                     pooled_mean - m_final >= 5 * pooled_se,
                     "gap " + fmt(pooled_mean - m_final) + " vs se " + fmt(pooled_se)});
  return results;
}

// ---------------------------------------------------------------------------
// Suite: ew-estimators (unbiasedness, closure agreement, mollification bias)
// ---------------------------------------------------------------------------

struct EwSampler {
  const TimeMap& map;
  const PlaneWaveEnsemble& ens;
  const ProblemSpec& spec;
  RngStream t_rng, x0_rng, r_rng;

  EwSampler(const TimeMap& m, const PlaneWaveEnsemble& e, const ProblemSpec& s,
            std::uint64_t seed)
      : map(m), ens(e), spec(s),
        t_rng(seed, stream_id::time_interaction),
        x0_rng(seed, stream_id::x0_interaction),
        r_rng(seed, stream_id::base_interaction) {}

  Vec estimate(int M_W) {
    Vec times(M_W);
    for (int i = 0; i < M_W; ++i) times(i) = t_rng.uniform(0.0, spec.T);
    const Mat X0_xi = sample_initial(spec, M_W, x0_rng);
    const Mat X0_eta = sample_initial(spec, M_W, x0_rng);
    const Mat R_xi = sample_base(map.base, M_W, r_rng);
    const Mat R_eta = sample_base(map.base, M_W, r_rng);
    const Mat Xi = push_time(map, times, X0_xi, R_xi);
    const Mat Eta = push_time(map, times, X0_eta, R_eta);
    return estimate_EW_secondary(ens, spec, times, Xi, Eta);
  }
};

std::vector<CheckResult> suite_ew() {
  std::vector<CheckResult> results;

  ProblemSpec spec;
  spec.n = 2;
  spec.theta = 1.0;
  spec.sigma = 1.0;
  spec.T = 1.0;
  spec.mu0 = Vec(2);
  spec.mu0 << 1.0, -1.0;
  spec.Sigma0 = 0.25;

  MlpSpec net{5, {16}, 2};  // [t, r] with d = 4
  BaseDist base{BaseDistType::StandardGaussian, 4};
  TimeMap map(net, base, 2, false, 41);
  PlaneWaveEnsemble ens = init_ensemble(8, 2, 0.8, BiasMode::UniformPhase, 0.5, 42);
  const int K = ens.size();

  EwSampler sampler(map, ens, spec, 61);

  // (a) Unbiasedness across batch sizes: 200 batches of 64 vs one of 1e5.
  {
    const Vec big = sampler.estimate(100000);
    const int B = 200, Mw = 64;
    Mat batch_estimates(B, K);
    for (int bi = 0; bi < B; ++bi) batch_estimates.row(bi) = sampler.estimate(Mw).transpose();
    const Eigen::RowVectorXd mean_b = batch_estimates.colwise().mean();
    Eigen::RowVectorXd sd_b(K);
    for (int k = 0; k < K; ++k) {
      const double mu = mean_b(k);
      sd_b(k) = std::sqrt((batch_estimates.col(k).array() - mu).square().sum() / (B - 1));
    }
    double worst = 0;
    for (int k = 0; k < K; ++k) {
      const double tol = 4.0 * sd_b(k) / std::sqrt(static_cast<double>(B));
      worst = std::max(worst, std::abs(mean_b(k) - big(k)) / tol);
    }
    results.push_back({"ew: small-batch mean matches M_W=1e5 estimate (unbiasedness)",
                       worst <= 1.0, "worst |diff|/tol " + fmt(worst)});
  }

  // (b) BatchMean closure agrees with the secondary-sample estimator.
  {
    const int reps = 8;
    Mat sec(reps, K), bm(reps, K);
    TimedepStreams streams(73);
    for (int r = 0; r < reps; ++r) {
      sec.row(r) = sampler.estimate(100000).transpose();

      const int N_T = 100, M_per = 1000;
      const Vec nodes = equispaced_midpoint_nodes(N_T, spec.T);
      std::vector<Mat> X0_nodes, R_nodes;
      for (int i = 0; i < N_T; ++i) {
        X0_nodes.push_back(sample_initial(spec, M_per, streams.x0_interior));
        R_nodes.push_back(sample_base(map.base, M_per, streams.base_interior));
      }
      bm.row(r) =
          interior_estimate(map, ens, spec, nodes, X0_nodes, R_nodes).E_W_batchmean.transpose();
    }
    auto col_stats = [&](const Mat& A, int k) {
      const double mu = A.col(k).mean();
      const double sd = std::sqrt((A.col(k).array() - mu).square().sum() / (reps - 1));
      return std::pair<double, double>(mu, sd / std::sqrt(static_cast<double>(reps)));
    };
    double worst = 0;
    for (int k = 0; k < K; ++k) {
      auto [ms, ses] = col_stats(sec, k);
      auto [mb, seb] = col_stats(bm, k);
      const double tol = 3.0 * std::sqrt(ses * ses + seb * seb);
      worst = std::max(worst, std::abs(ms - mb) / tol);
    }
    results.push_back({"ew: batch-mean closure matches secondary-sample estimator",
                       worst <= 1.0, "worst |diff|/tol " + fmt(worst)});
  }

  // (c) Mollification bias is O(eps^2): quadrature oracle for
  //     E(eps) = E[grad psi(xi) . gradW_eps(xi - eta)], xi, eta ~ N(0, s^2 I_3),
  //     psi = sin(w1 x_1 + pi/2). Reduces to a radial integral over |xi - eta|.
  {
    const double s = 0.5, w1 = 1.0;
    const double tau = s * std::sqrt(2.0);  // scale of z = xi - eta

    auto radial_integral = [&](double eps, int points) {
      // integrand(r) = p_chi3(r; tau) * h(r) / (r^2 + eps^2)
      // h(r) = r (beta cos beta - sin beta) / beta^2, beta = w1 r / 2
      auto f = [&](double r) {
        if (r <= 0) return 0.0;
        const double beta = 0.5 * w1 * r;
        double hb;  // (beta cos beta - sin beta) / beta^2
        if (beta < 1e-3)
          hb = -beta / 3.0 + beta * beta * beta / 30.0;
        else
          hb = (beta * std::cos(beta) - std::sin(beta)) / (beta * beta);
        const double h = r * hb;
        const double p = std::sqrt(2.0 / M_PI) * r * r / (tau * tau * tau) *
                         std::exp(-r * r / (2.0 * tau * tau));
        return p * h / (r * r + eps * eps);
      };
      // Composite Simpson on [0, 12 tau].
      const double hi = 12.0 * tau;
      const double dr = hi / points;
      double acc = f(0.0) + f(hi);
      for (int i = 1; i < points; ++i) acc += f(i * dr) * (i % 2 == 1 ? 4.0 : 2.0);
      return acc * dr / 3.0;
    };
    auto ew_value = [&](double eps) {
      const double coarse = radial_integral(eps, 160000);
      const double fine = radial_integral(eps, 320000);
      if (std::abs(fine - coarse) > 1e-10)
        throw NumericError("mollification quadrature did not converge", fine - coarse);
      return -w1 * std::exp(-w1 * w1 * s * s / 4.0) * fine;
    };

    const double exact = ew_value(0.0);
    const std::vector<double> eps_list = {0.1, 0.05, 0.025};
    std::vector<double> bias;
    for (double e : eps_list) bias.push_back(std::abs(ew_value(e) - exact));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      const double x = std::log(eps_list[i]);
      const double y = std::log(bias[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double np = 3.0;
    const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    results.push_back({"ew: mollification bias slope ~ 2 in eps (quadrature oracle)",
                       slope >= 1.6 && slope <= 2.4,
                       "slope " + fmt(slope) + " (biases " + fmt(bias[0]) + ", " +
                           fmt(bias[1]) + ", " + fmt(bias[2]) + ")"});

    // The Monte Carlo estimator itself must reproduce the quadrature value.
    ProblemSpec mspec;
    mspec.n = 3;
    mspec.theta = 1.0;
    mspec.sigma = 1.0;
    mspec.kernel = KernelType::MollifiedLog;
    mspec.kernel_eps = 0.1;
    mspec.T = 1.0;
    PlaneWaveEnsemble pw;
    pw.W = Mat::Zero(1, 3);
    pw.W(0, 0) = w1;
    pw.b = Vec::Constant(1, M_PI / 2.0);
    pw.kappa = Vec::Zero(1);

    RngStream mc_rng(83, stream_id::evaluation);
    const int B = 20, Mb = 20000;
    Vec estimates(B);
    for (int bi = 0; bi < B; ++bi) {
      const Mat Xi = s * mc_rng.normal_matrix(Mb, 3);
      const Mat Eta = s * mc_rng.normal_matrix(Mb, 3);
      estimates(bi) = estimate_EW_secondary(pw, mspec, Vec::Zero(Mb), Xi, Eta)(0);
    }
    const double mc_mean = estimates.mean();
    const double mc_se = std::sqrt((estimates.array() - mc_mean).square().sum() / (B - 1)) /
                         std::sqrt(static_cast<double>(B));
    const double target = ew_value(0.1);
    results.push_back({"ew: Monte Carlo estimator matches quadrature at eps = 0.1",
                       std::abs(mc_mean - target) <= 4 * mc_se,
                       "mc " + fmt(mc_mean) + " vs quadrature " + fmt(target) + " (se " +
                           fmt(mc_se) + ")"});
  }

  return results;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"gradients", "residual-decay", "spurious-minimizer", "particle",
          "time-sampling", "ew-estimators"};
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

std::vector<CheckResult> verify_suite(const std::string& suite) {
  if (suite == "gradients") return suite_gradients();
  if (suite == "residual-decay") return suite_residual_decay();
  if (suite == "spurious-minimizer") return suite_spurious();
  if (suite == "particle") return suite_particle();
  if (suite == "time-sampling") return suite_time_sampling();
  if (suite == "ew-estimators") return suite_ew();
  if (suite == "all") {
    std::vector<CheckResult> all;
    for (const auto& name : verify_suite_names()) {
      auto part = verify_suite(name);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw std::invalid_argument("unknown verify suite '" + suite + "'");
}

}  // namespace mfp
