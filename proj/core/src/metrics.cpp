#include "mfp/metrics.hpp"

namespace mfp {

std::pair<Vec, Vec> sample_moments(const Mat& X) {
  if (X.rows() == 0) throw std::invalid_argument("sample_moments: empty sample set");
  const Vec mean = X.colwise().mean();
  if (X.rows() == 1) return {mean, Vec::Zero(X.cols())};
  const Mat centered = X.rowwise() - mean.transpose();
  const Vec var = centered.colwise().squaredNorm().transpose() /
                  static_cast<double>(X.rows() - 1);
  return {mean, var};
}

MetricsReport compute_metrics(const std::vector<std::pair<double, Mat>>& samples_by_time,
                              const ProblemSpec& spec) {
  std::vector<double> times;
  times.reserve(samples_by_time.size());
  for (const auto& [t, X] : samples_by_time) times.push_back(t);
  const MomentTrajectory exact = exact_moments(spec, times);

  MetricsReport report;
  for (std::size_t i = 0; i < samples_by_time.size(); ++i) {
    const Mat& X = samples_by_time[i].second;
    if (X.cols() != spec.n) throw std::invalid_argument("compute_metrics: sample dim != n");
    TimeMetrics tm;
    tm.t = samples_by_time[i].first;
    std::tie(tm.emp_mean, tm.emp_var) = sample_moments(X);
    tm.mean_err = tm.emp_mean - exact.means[i];
    tm.var_err = tm.emp_var - exact.variances[i];
    tm.avg_abs_mean_err = tm.mean_err.cwiseAbs().mean();
    tm.avg_abs_var_err = tm.var_err.cwiseAbs().mean();
    tm.l2_mean_err = tm.mean_err.norm();
    tm.l2_var_err = tm.var_err.norm();
    report.per_time.push_back(std::move(tm));
  }
  return report;
}

}  // namespace mfp
