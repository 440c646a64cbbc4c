#pragma once

#include <cstdint>
#include <vector>

#include "mfp/ensemble.hpp"
#include "mfp/problem.hpp"
#include "mfp/pushforward.hpp"
#include "mfp/stationary.hpp"  // TrainReport

namespace mfp {

/// How the interaction term E_W is estimated.
///   BatchMean: per-node batch means close the mean-field term (quadratic
///              kernel only; the variance-reduced default).
///   SecondarySample: unbiased two-sample estimator, any kernel.
enum class EwMode { BatchMean, SecondarySample };

struct TimeTrainConfig {
  int N_T = 30;    // fixed quadrature time nodes
  int M_per = 100; // samples per node; interior budget M = N_T * M_per
  int M_0 = 1000;
  int M_T = 1000;
  int M_W = 0;     // interaction batch (SecondarySample only)
  int K = 1000;
  int epochs = 1000;
  double lr_gen = 1e-3;
  double lr_test = 1e-2;
  int adversary_period = 2;
  std::uint64_t seed = 0;
  EwMode ew_mode = EwMode::BatchMean;
  double divergence_threshold = 1e6;

  int M() const { return N_T * M_per; }
  void validate(const ProblemSpec& spec) const;
};

/// Per-test-function values of the six space-time estimators and the
/// assembled residual E_T - E_0 - E_t + E_V + E_W - E_D.
struct ResidualBreakdown {
  Vec E_T, E_0, E_t, E_V, E_W, E_D;
  Vec residual;
};

Vec assemble_residual(const ResidualBreakdown& b);
/// Fills b.residual and returns (1/K) sum_k residual_k^2.
double assemble_and_loss(ResidualBreakdown& b);

/// Midpoint-rule nodes t_i = (i - 1/2) T / N_T on (0, T).
Vec equispaced_midpoint_nodes(int N_T, double T);

// ---- plain Monte Carlo estimators (sample-based; also the oracle path) ----

/// E_0 = mean of psi(0, x0) over X0 ~ rho0. No dependence on the pushforward.
Vec estimate_E0(const PlaneWaveEnsemble& ens, const Mat& X0);

/// E_T from already-pushed terminal samples XT at time T.
Vec estimate_ET_samples(const PlaneWaveEnsemble& ens, double T, const Mat& XT);
/// E_T by pushing (X0_T, R_T) through the map to time T.
Vec estimate_ET(const TimeMap& map, const PlaneWaveEnsemble& ens, double T,
                const Mat& X0_T, const Mat& R_T);

/// Unbiased estimate of m(t): mean of M_per pushed samples at the shared time t.
Vec per_node_mean(const TimeMap& map, double t, const Mat& X0, const Mat& R);

struct InteriorEstimates {
  Vec E_t, E_V, E_D;
  Vec E_W_batchmean;
};

/// Quadrature-sum estimators over per-node sample matrices X_nodes[i] at
/// nodes[i]. E_W_batchmean uses each node's own batch mean as m(t_i).
InteriorEstimates interior_estimate_samples(const PlaneWaveEnsemble& ens,
                                            const ProblemSpec& spec, const Vec& nodes,
                                            const std::vector<Mat>& X_nodes);
/// Same, pushing per-node (X0, R) batches through the map first.
InteriorEstimates interior_estimate(const TimeMap& map, const PlaneWaveEnsemble& ens,
                                    const ProblemSpec& spec, const Vec& nodes,
                                    const std::vector<Mat>& X0_nodes,
                                    const std::vector<Mat>& R_nodes);

/// Two-sample interaction estimator (T/M_W) sum_m grad psi(t_m, xi_m) .
/// grad W(xi_m - eta_m), where (xi, eta) are independent pushforward samples
/// at shared times. Unbiased for any M_W >= 1.
Vec estimate_EW_secondary(const PlaneWaveEnsemble& ens, const ProblemSpec& spec,
                          const Vec& times, const Mat& Xi, const Mat& Eta);

// ---- tape path ----

/// One epoch's worth of sample batches (all data; drawn outside the tape).
struct TimedepBatches {
  Vec nodes;        // N_T quadrature nodes
  Mat X0_interior;  // M x n, node-major blocks of M_per rows
  Mat R_interior;   // M x d
  Mat X0_terminal, R_terminal;
  Mat X0_initial;
  // SecondarySample only:
  Vec t_interaction;
  Mat X0_xi, R_xi, X0_eta, R_eta;
};

struct TimedepStreams {
  RngStream x0_interior, base_interior;
  RngStream x0_terminal, base_terminal;
  RngStream initial;
  RngStream time_interaction, x0_interaction, base_interaction;
  explicit TimedepStreams(std::uint64_t seed);
};

TimedepBatches draw_batches(const TimeMap& map, const ProblemSpec& spec,
                            const TimeTrainConfig& cfg, TimedepStreams& streams);

/// All six estimators and the loss on one tape; gradients flow into the
/// pushforward parameters (through the pushed samples, the per-node means and
/// both interaction samples) and into the ensemble parameters.
struct TimedepLossVars {
  ad::Var E_T, E_0, E_t, E_V, E_W, E_D;
  ad::Var residual;
  ad::Var loss;
};

TimedepLossVars build_timedep_loss(ad::Tape& tape, const TimeMap& map,
                                   const MlpBinding& mlp_binding,
                                   const EnsembleBinding& ens_binding,
                                   const ProblemSpec& spec, const TimeTrainConfig& cfg,
                                   const TimedepBatches& batches);

/// Snapshot of the estimator values from a built loss graph.
ResidualBreakdown breakdown_values(const ad::Tape& tape, const TimedepLossVars& vars);

TrainReport train_timedep(TimeMap& map, PlaneWaveEnsemble& ens, const ProblemSpec& spec,
                          const TimeTrainConfig& cfg);

}  // namespace mfp
