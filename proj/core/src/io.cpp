#include "mfp/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mfp/particle.hpp"
#include "mfp/verify.hpp"

namespace mfp {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& data) {
  if (static_cast<Eigen::Index>(header.size()) != data.cols())
    throw std::invalid_argument("write_csv: header/column count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j)
    out << header[j] << (j + 1 < header.size() ? "," : "\n");
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      out << format_full(data(i, j)) << (j + 1 < data.cols() ? "," : "\n");
}

Mat read_csv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  if (header) *header = cols;
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    ++rows;
  }
  Mat data(rows, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      data(i, j) = values[static_cast<std::size_t>(i * data.cols() + j)];
  return data;
}

void write_loss_history(const std::string& path, const std::vector<double>& losses) {
  Mat data(static_cast<Eigen::Index>(losses.size()), 2);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    data(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    data(static_cast<Eigen::Index>(i), 1) = losses[i];
  }
  write_csv(path, {"epoch", "loss"}, data);
}

void write_moments_csv(const std::string& path, const MomentTrajectory& traj) {
  if (traj.times.empty()) throw std::invalid_argument("write_moments_csv: empty trajectory");
  const Eigen::Index n = traj.means.front().size();
  Mat data(static_cast<Eigen::Index>(traj.times.size()), 1 + 2 * n);
  std::vector<std::string> header = {"t"};
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("m_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("var_" + std::to_string(j + 1));
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    data(r, 0) = traj.times[i];
    data.row(r).segment(1, n) = traj.means[i].transpose();
    data.row(r).segment(1 + n, n) = traj.variances[i].transpose();
  }
  write_csv(path, header, data);
}

void write_samples_csv(const std::string& path, const Mat& samples) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < samples.cols(); ++j)
    header.push_back("x_" + std::to_string(j + 1));
  write_csv(path, header, samples);
}

namespace {

json metrics_to_json(const MetricsReport& report) {
  json j;
  j["final_loss"] = report.final_loss;
  j["wall_seconds"] = report.wall_seconds;
  json per_time = json::array();
  for (const auto& tm : report.per_time) {
    json e;
    e["t"] = tm.t;
    e["avg_abs_mean_err"] = tm.avg_abs_mean_err;
    e["avg_abs_var_err"] = tm.avg_abs_var_err;
    e["l2_mean_err"] = tm.l2_mean_err;
    e["l2_var_err"] = tm.l2_var_err;
    e["emp_mean"] = std::vector<double>(tm.emp_mean.data(), tm.emp_mean.data() + tm.emp_mean.size());
    e["emp_var"] = std::vector<double>(tm.emp_var.data(), tm.emp_var.data() + tm.emp_var.size());
    per_time.push_back(e);
  }
  j["per_time"] = per_time;
  return j;
}

}  // namespace

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics_to_json(report).dump(2) << "\n";
}

namespace {

json mlp_spec_to_json(const MlpSpec& spec) {
  json j;
  j["input_dim"] = spec.input_dim;
  j["hidden_widths"] = spec.hidden_widths;
  j["output_dim"] = spec.output_dim;
  j["activation"] = "tanh";
  return j;
}

MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  spec.output_dim = j.at("output_dim").get<int>();
  return spec;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_std(const Mat& m) { return {m.data(), m.data() + m.size()}; }

Vec vec_from_json(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const RunConfig* config_snapshot) {
  json j;
  j["schema_version"] = ckpt.schema_version;
  j["mode"] = to_string(ckpt.mode);
  j["network"] = mlp_spec_to_json(ckpt.network);
  j["params"] = to_std(ckpt.params);
  j["base_dist"] = ckpt.base.type == BaseDistType::UniformUnitCube ? "uniform" : "gaussian";
  j["base_dim"] = ckpt.base.d;
  j["include_x0_input"] = ckpt.include_x0_input;
  j["seed"] = ckpt.seed;

  json jp;
  jp["n"] = ckpt.problem.n;
  jp["theta"] = ckpt.problem.theta;
  jp["sigma"] = ckpt.problem.sigma;
  jp["kernel"] = ckpt.problem.kernel == KernelType::Quadratic ? "quadratic" : "mollified-log";
  jp["kernel_eps"] = ckpt.problem.kernel_eps;
  jp["T"] = ckpt.problem.T;
  jp["Sigma0"] = ckpt.problem.Sigma0;
  jp["mu0"] = to_std(ckpt.problem.initial_mean());
  j["problem"] = jp;

  json jens;
  jens["K"] = ckpt.ensemble.size();
  jens["n"] = ckpt.ensemble.dim();
  jens["W"] = to_std(ckpt.ensemble.W);  // column-major storage order
  jens["b"] = to_std(ckpt.ensemble.b);
  jens["kappa"] = to_std(ckpt.ensemble.kappa);
  j["ensemble"] = jens;

  if (config_snapshot) j["config"] = to_json(*config_snapshot);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j = json::parse(in);
  const int version = j.at("schema_version").get<int>();
  if (version != 1)
    throw std::runtime_error("unsupported checkpoint schema_version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.schema_version = version;
  const std::string mode = j.at("mode").get<std::string>();
  ckpt.mode = mode == "transient" ? RunMode::Transient : RunMode::Stationary;
  ckpt.network = mlp_spec_from_json(j.at("network"));
  ckpt.params = vec_from_json(j.at("params"));
  ckpt.base.type = j.at("base_dist").get<std::string>() == "uniform"
                       ? BaseDistType::UniformUnitCube
                       : BaseDistType::StandardGaussian;
  ckpt.base.d = j.at("base_dim").get<int>();
  ckpt.include_x0_input = j.at("include_x0_input").get<bool>();
  ckpt.seed = j.at("seed").get<std::uint64_t>();

  const json& jp = j.at("problem");
  ckpt.problem.n = jp.at("n").get<int>();
  ckpt.problem.theta = jp.at("theta").get<double>();
  ckpt.problem.sigma = jp.at("sigma").get<double>();
  ckpt.problem.kernel = jp.at("kernel").get<std::string>() == "quadratic"
                            ? KernelType::Quadratic
                            : KernelType::MollifiedLog;
  ckpt.problem.kernel_eps = jp.at("kernel_eps").get<double>();
  ckpt.problem.T = jp.at("T").get<double>();
  ckpt.problem.Sigma0 = jp.at("Sigma0").get<double>();
  ckpt.problem.mu0 = vec_from_json(jp.at("mu0"));

  const json& jens = j.at("ensemble");
  const int K = jens.at("K").get<int>();
  const int n = jens.at("n").get<int>();
  const Vec w = vec_from_json(jens.at("W"));
  if (w.size() != static_cast<Eigen::Index>(K) * n)
    throw std::runtime_error("checkpoint: ensemble W size mismatch");
  ckpt.ensemble.W = Eigen::Map<const Mat>(w.data(), K, n);
  ckpt.ensemble.b = vec_from_json(jens.at("b"));
  ckpt.ensemble.kappa = vec_from_json(jens.at("kappa"));
  return ckpt;
}

namespace {

std::string time_suffix(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

MetricsReport metrics_from_trajectory(const MomentTrajectory& traj, const ProblemSpec& spec) {
  const MomentTrajectory exact = exact_moments(spec, traj.times);
  MetricsReport report;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    TimeMetrics tm;
    tm.t = traj.times[i];
    tm.emp_mean = traj.means[i];
    tm.emp_var = traj.variances[i];
    tm.mean_err = traj.means[i] - exact.means[i];
    tm.var_err = traj.variances[i] - exact.variances[i];
    tm.avg_abs_mean_err = tm.mean_err.cwiseAbs().mean();
    tm.avg_abs_var_err = tm.var_err.cwiseAbs().mean();
    tm.l2_mean_err = tm.mean_err.norm();
    tm.l2_var_err = tm.var_err.norm();
    report.per_time.push_back(std::move(tm));
  }
  return report;
}

int run_stationary(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  PlaneWaveEnsemble ens = init_ensemble(config.ensemble.K, config.problem.n,
                                        config.ensemble.sigma_w, BiasMode::UniformPhase,
                                        std::nullopt, config.seed);
  StationaryMap map(config.network_spec(), config.base, config.seed);
  const TrainReport report = train_stationary(map, ens, config.problem, config.stationary_train);

  write_loss_history((dir / "loss_history.csv").string(), report.loss_history);

  RngStream eval_rng(config.seed, stream_id::evaluation);
  const Mat samples = push_stationary(map, sample_base(map.base, config.eval_sample_count, eval_rng));
  write_samples_csv((dir / "samples.csv").string(), samples);

  const auto [exact_mean, exact_var] = stationary_moments(config.problem);
  const auto [emp_mean, emp_var] = sample_moments(samples);
  json m;
  m["final_loss"] = report.final_loss;
  m["wall_seconds"] = report.wall_seconds;
  m["emp_mean"] = to_std(emp_mean);
  m["emp_std"] = to_std(Vec(emp_var.cwiseSqrt()));
  m["exact_std"] = std::sqrt(exact_var);
  m["avg_abs_mean_err"] = (emp_mean - exact_mean).cwiseAbs().mean();
  m["avg_abs_var_err"] = (emp_var.array() - exact_var).abs().mean();
  std::ofstream mout(dir / "metrics.json");
  mout << m.dump(2) << "\n";

  Checkpoint ckpt{1, RunMode::Stationary, map.spec, map.params.flat(), map.base,
                  false, config.problem, ens, config.seed};
  save_checkpoint((dir / "checkpoint.json").string(), ckpt, &config);

  std::cout << "stationary run complete: final loss " << report.final_loss << ", "
            << report.wall_seconds << " s\n";
  return 0;
}

int run_transient(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  PlaneWaveEnsemble ens = init_ensemble(config.ensemble.K, config.problem.n,
                                        config.ensemble.sigma_w, BiasMode::UniformPhase,
                                        config.ensemble.kappa_scale, config.seed);
  TimeMap map(config.network_spec(), config.base, config.problem.n,
              config.include_x0_input, config.seed);
  const TrainReport report = train_timedep(map, ens, config.problem, config.time_train);

  write_loss_history((dir / "loss_history.csv").string(), report.loss_history);

  RngStream eval_rng(config.seed, stream_id::evaluation);
  std::vector<std::pair<double, Mat>> samples_by_time;
  MomentTrajectory emp;
  for (double t : config.eval_times) {
    const Mat X0 = sample_initial(config.problem, config.eval_sample_count, eval_rng);
    const Mat R = sample_base(map.base, config.eval_sample_count, eval_rng);
    Mat X = push_time(map, Vec::Constant(config.eval_sample_count, t), X0, R);
    write_samples_csv((dir / ("samples_t" + time_suffix(t) + ".csv")).string(), X);
    auto [m, v] = sample_moments(X);
    emp.times.push_back(t);
    emp.means.push_back(m);
    emp.variances.push_back(v);
    samples_by_time.emplace_back(t, std::move(X));
  }
  write_moments_csv((dir / "moments.csv").string(), emp);
  write_moments_csv((dir / "exact_moments.csv").string(),
                    exact_moments(config.problem, config.eval_times));

  MetricsReport metrics = compute_metrics(samples_by_time, config.problem);
  metrics.final_loss = report.final_loss;
  metrics.wall_seconds = report.wall_seconds;
  write_metrics_json((dir / "metrics.json").string(), metrics);

  Checkpoint ckpt{1, RunMode::Transient, map.spec, map.params.flat(), map.base,
                  map.include_x0_input, config.problem, ens, config.seed};
  save_checkpoint((dir / "checkpoint.json").string(), ckpt, &config);

  std::cout << "transient run complete: final loss " << report.final_loss << ", "
            << report.wall_seconds << " s\n";
  return 0;
}

int run_particle_baseline(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  const MomentTrajectory traj =
      simulate_particles(config.problem, config.particle.N, config.particle.dt,
                         config.problem.T, config.seed, config.eval_times);
  write_moments_csv((dir / "moments.csv").string(), traj);
  write_moments_csv((dir / "exact_moments.csv").string(),
                    exact_moments(config.problem, config.eval_times));
  write_metrics_json((dir / "metrics.json").string(),
                     metrics_from_trajectory(traj, config.problem));
  std::cout << "particle baseline complete: N=" << config.particle.N
            << ", dt=" << config.particle.dt << "\n";
  return 0;
}

int run_verify(const RunConfig& config) {
  const auto results = verify_suite(config.verify_suite);
  for (const auto& r : results)
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
              << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int run(const RunConfig& config) {
  config.validate();
  if (!config.output_dir.empty()) fs::create_directories(config.output_dir);
  try {
    switch (config.mode) {
      case RunMode::Stationary: return run_stationary(config);
      case RunMode::Transient: return run_transient(config);
      case RunMode::ParticleBaseline: return run_particle_baseline(config);
      case RunMode::Verify: return run_verify(config);
    }
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

MetricsReport metrics_from_checkpoint(const Checkpoint& ckpt,
                                      const std::vector<double>& times, int sample_count,
                                      std::uint64_t seed) {
  RngStream eval_rng(seed, stream_id::evaluation);
  std::vector<std::pair<double, Mat>> samples_by_time;
  if (ckpt.mode == RunMode::Transient) {
    TimeMap map(ckpt.network, ckpt.base, ckpt.problem.n, ckpt.include_x0_input, 0);
    map.params.flat() = ckpt.params;
    for (double t : times) {
      const Mat X0 = sample_initial(ckpt.problem, sample_count, eval_rng);
      const Mat R = sample_base(map.base, sample_count, eval_rng);
      samples_by_time.emplace_back(
          t, push_time(map, Vec::Constant(sample_count, t), X0, R));
    }
    return compute_metrics(samples_by_time, ckpt.problem);
  }
  // Stationary: compare against the equilibrium law at effectively infinite time.
  StationaryMap map(ckpt.network, ckpt.base, 0);
  map.params.flat() = ckpt.params;
  const Mat X = push_stationary(map, sample_base(map.base, sample_count, eval_rng));
  const auto [exact_mean, exact_var] = stationary_moments(ckpt.problem);
  MetricsReport report;
  TimeMetrics tm;
  tm.t = std::numeric_limits<double>::infinity();
  std::tie(tm.emp_mean, tm.emp_var) = sample_moments(X);
  tm.mean_err = tm.emp_mean - exact_mean;
  tm.var_err = tm.emp_var.array() - exact_var;
  tm.avg_abs_mean_err = tm.mean_err.cwiseAbs().mean();
  tm.avg_abs_var_err = tm.var_err.cwiseAbs().mean();
  tm.l2_mean_err = tm.mean_err.norm();
  tm.l2_var_err = tm.var_err.norm();
  report.per_time.push_back(std::move(tm));
  return report;
}

}  // namespace mfp
