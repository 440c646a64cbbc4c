#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "mfp/problem.hpp"

namespace mfp {

struct TimeMetrics {
  double t = 0;
  Vec emp_mean, emp_var;   // per component
  Vec mean_err, var_err;   // empirical minus exact
  double avg_abs_mean_err = 0;
  double avg_abs_var_err = 0;
  double l2_mean_err = 0;
  double l2_var_err = 0;
};

struct MetricsReport {
  std::vector<TimeMetrics> per_time;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = std::numeric_limits<double>::quiet_NaN();
};

/// Empirical per-component moments of each sample group vs exact_moments.
/// Variance uses the unbiased estimator (defined as 0 for a single sample).
MetricsReport compute_metrics(const std::vector<std::pair<double, Mat>>& samples_by_time,
                              const ProblemSpec& spec);

/// Per-component mean and unbiased variance of sample rows.
std::pair<Vec, Vec> sample_moments(const Mat& X);

}  // namespace mfp
