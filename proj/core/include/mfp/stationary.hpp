#pragma once

#include <cstdint>
#include <vector>

#include "mfp/ensemble.hpp"
#include "mfp/problem.hpp"
#include "mfp/pushforward.hpp"

namespace mfp {

struct StationaryTrainConfig {
  int M = 2000;
  int M_W = 0;  // interaction batch; unused under the batch-mean closure
  int K = 2000;
  int epochs = 5000;
  double lr_gen = 1e-3;
  double lr_test = 1e-2;
  int adversary_period = 2;  // generator steps per adversary step
  std::uint64_t seed = 0;
  double divergence_threshold = 1e6;

  void validate() const;
};

struct TrainReport {
  std::vector<double> loss_history;  // one entry per epoch
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0;
  Vec sample_mean;  // final sample statistics (per component)
  Vec sample_std;
};

/// Arithmetic mean of rows. On the tape this is colmean, so the gradient
/// flows back into the pushforward parameters.
Vec batch_mean(const Mat& X);

/// Monte Carlo stationary weak residuals, one per test function:
///   R_k = (1/M) sum_m [ (-lambda x_m + m_hat) . grad f_k(x_m)
///                       + (sigma^2/2) lap f_k(x_m) ].
/// This is the generator applied to f_k under the quadratic-kernel drift;
/// the relative signs are those of the weak stationarity condition.
Vec stationary_residuals(const Mat& X, const Vec& m_hat, const PlaneWaveEnsemble& ens,
                         const ProblemSpec& spec);

/// (1/K) sum_k R_k^2.
double stationary_loss(const Vec& residuals);

/// The full stationary loss on a tape (shared by training and the gradient
/// checks): push base batch, batch mean, residuals, squared-mean loss.
ad::Var build_stationary_loss(ad::Tape& tape, const StationaryMap& map,
                              const MlpBinding& mlp_binding,
                              const EnsembleBinding& ens_binding,
                              const ProblemSpec& spec, const Mat& R_base);

/// Alternating min-max loop: Adam descent on the pushforward every epoch,
/// SGD ascent on the test functions every adversary_period epochs, fresh
/// i.i.d. base batch per epoch. Throws TrainingDiverged on non-finite or
/// exploding loss.
TrainReport train_stationary(StationaryMap& map, PlaneWaveEnsemble& ens,
                             const ProblemSpec& spec, const StationaryTrainConfig& cfg);

}  // namespace mfp
