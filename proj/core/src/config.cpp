#include "mfp/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace mfp {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError(section.empty() ? key : section + "." + key, "unknown key");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& section, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key, e.what());
  }
}

template <typename T>
T get_required(const json& obj, const std::string& section, const char* key) {
  if (!obj.contains(key))
    throw ConfigError(section.empty() ? key : section + "." + key, "missing required field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key, e.what());
  }
}

RunMode parse_mode(const std::string& s) {
  if (s == "stationary") return RunMode::Stationary;
  if (s == "transient") return RunMode::Transient;
  if (s == "particle-baseline") return RunMode::ParticleBaseline;
  if (s == "verify") return RunMode::Verify;
  throw ConfigError("mode", "expected stationary|transient|particle-baseline|verify, got '" + s + "'");
}

KernelType parse_kernel(const std::string& s) {
  if (s == "quadratic") return KernelType::Quadratic;
  if (s == "mollified-log") return KernelType::MollifiedLog;
  throw ConfigError("problem.kernel", "expected quadratic|mollified-log, got '" + s + "'");
}

BaseDistType parse_base(const std::string& s) {
  if (s == "uniform") return BaseDistType::UniformUnitCube;
  if (s == "gaussian") return BaseDistType::StandardGaussian;
  throw ConfigError("network.base_dist", "expected uniform|gaussian, got '" + s + "'");
}

EwMode parse_ew_mode(const std::string& s) {
  if (s == "batch-mean") return EwMode::BatchMean;
  if (s == "secondary-sample") return EwMode::SecondarySample;
  throw ConfigError("train.ew_mode", "expected batch-mean|secondary-sample, got '" + s + "'");
}

/// "auto" or a positive number.
double parse_scale(const json& obj, const std::string& section, const char* key,
                   double auto_value, double fallback, bool* was_present = nullptr) {
  if (was_present) *was_present = obj.contains(key);
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return auto_value;
    throw ConfigError(section + "." + std::string(key), "expected a number or \"auto\"");
  }
  return v.get<double>();
}

}  // namespace

MlpSpec RunConfig::network_spec() const {
  MlpSpec spec;
  spec.hidden_widths = hidden_widths;
  spec.output_dim = problem.n;
  if (mode == RunMode::Transient)
    spec.input_dim = 1 + (include_x0_input ? problem.n : 0) + base.d;
  else
    spec.input_dim = base.d;
  return spec;
}

void RunConfig::validate() const {
  problem.validate();
  network_spec().validate();
  if (eval_sample_count < 1) throw ConfigError("eval_sample_count", "must be >= 1");
  if (ensemble.K < 1) throw ConfigError("ensemble.K", "must be >= 1");
  if (ensemble.sigma_w <= 0) throw ConfigError("ensemble.sigma_w", "must be positive");
  if (mode == RunMode::Stationary) {
    stationary_train.validate();
    if (base.type != BaseDistType::UniformUnitCube && base.type != BaseDistType::StandardGaussian)
      throw ConfigError("network.base_dist", "invalid");
  }
  if (mode == RunMode::Transient) {
    time_train.validate(problem);
    if (ensemble.kappa_scale < 0) throw ConfigError("ensemble.kappa_scale", "must be >= 0");
    for (double t : eval_times)
      if (t < 0 || t > problem.T) throw ConfigError("eval_times", "time outside [0, T]");
  }
  if (mode == RunMode::ParticleBaseline) {
    if (particle.N < 2) throw ConfigError("particle.N", "must be >= 2");
    if (particle.dt <= 0) throw ConfigError("particle.dt", "must be positive");
  }
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "", {"schema_version", "mode", "seed", "output_dir", "problem", "network",
                     "ensemble", "train", "particle", "eval_times", "eval_sample_count",
                     "verify_suite"});

  RunConfig c;
  c.schema_version = get_or(j, "", "schema_version", 1);
  if (c.schema_version != 1)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version));
  c.mode = parse_mode(get_required<std::string>(j, "", "mode"));
  c.seed = get_or<std::uint64_t>(j, "", "seed", 0);
  c.output_dir = get_or<std::string>(j, "", "output_dir", "out");

  // problem
  const json jp = get_required<json>(j, "", "problem");
  check_keys(jp, "problem", {"n", "theta", "sigma", "kernel", "kernel_eps", "T", "mu0", "Sigma0"});
  c.problem.n = get_required<int>(jp, "problem", "n");
  c.problem.theta = get_required<double>(jp, "problem", "theta");
  c.problem.sigma = get_required<double>(jp, "problem", "sigma");
  c.problem.kernel = parse_kernel(get_or<std::string>(jp, "problem", "kernel", "quadratic"));
  c.problem.kernel_eps = get_or(jp, "problem", "kernel_eps", 0.0);
  c.problem.T = get_or(jp, "problem", "T", 1.0);
  c.problem.Sigma0 = get_or(jp, "problem", "Sigma0", 0.25);
  if (jp.contains("mu0")) {
    const json& m = jp.at("mu0");
    if (m.is_number()) {
      c.problem.mu0 = Vec::Constant(c.problem.n, m.get<double>());
    } else {
      auto v = m.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != c.problem.n)
        throw ConfigError("problem.mu0", "length != n");
      c.problem.mu0 = Eigen::Map<const Vec>(v.data(), v.size());
    }
  }

  // network
  const json jn = get_or<json>(j, "", "network", json::object());
  check_keys(jn, "network", {"hidden_widths", "base_dist", "base_dim", "include_x0_input"});
  c.hidden_widths = get_or<std::vector<int>>(jn, "network", "hidden_widths", {128, 128, 128});
  const std::string default_base =
      c.mode == RunMode::Transient ? "gaussian" : "uniform";
  c.base.type = parse_base(get_or<std::string>(jn, "network", "base_dist", default_base));
  c.base.d = get_or(jn, "network", "base_dim", 2 * c.problem.n);
  c.include_x0_input = get_or(jn, "network", "include_x0_input", false);

  // ensemble
  const json je = get_or<json>(j, "", "ensemble", json::object());
  check_keys(je, "ensemble", {"K", "sigma_w", "kappa_scale"});
  c.ensemble.K = get_or(je, "ensemble", "K", 2000);
  const double sigma_w_auto =
      default_frequency_scale(c.problem.lambda(), c.problem.sigma, c.problem.n);
  c.ensemble.sigma_w = parse_scale(je, "ensemble", "sigma_w", sigma_w_auto, sigma_w_auto);
  // kappa auto rule: match temporal to spatial oscillation, sigma_w * L_x / T
  // with L_x = sigma / sqrt(2 lambda).
  const double l_x = c.problem.sigma / std::sqrt(2.0 * c.problem.lambda());
  const double kappa_auto = c.ensemble.sigma_w * l_x / c.problem.T;
  c.ensemble.kappa_scale = parse_scale(je, "ensemble", "kappa_scale", kappa_auto, kappa_auto);

  // train
  const json jt = get_or<json>(j, "", "train", json::object());
  check_keys(jt, "train", {"epochs", "M", "M_W", "lr_gen", "lr_test", "adversary_period",
                           "N_T", "M_per", "M_0", "M_T", "ew_mode"});
  if (c.mode == RunMode::Stationary) {
    auto& t = c.stationary_train;
    t.M = get_or(jt, "train", "M", 2000);
    t.M_W = get_or(jt, "train", "M_W", 0);
    t.K = c.ensemble.K;
    t.epochs = get_or(jt, "train", "epochs", 5000);
    t.lr_gen = get_or(jt, "train", "lr_gen", 1e-3);
    t.lr_test = get_or(jt, "train", "lr_test", 1e-2);
    t.adversary_period = get_or(jt, "train", "adversary_period", 2);
    t.seed = c.seed;
  } else if (c.mode == RunMode::Transient) {
    auto& t = c.time_train;
    t.N_T = get_or(jt, "train", "N_T", 30);
    if (jt.contains("M_per")) {
      t.M_per = get_or(jt, "train", "M_per", 100);
    } else {
      // Paper-style configs give the interior budget M; split it across the
      // nodes, rounding the per-node count down.
      const int M = get_or(jt, "train", "M", 3000);
      t.M_per = std::max(1, M / t.N_T);
    }
    t.M_0 = get_or(jt, "train", "M_0", 1000);
    t.M_T = get_or(jt, "train", "M_T", 1000);
    t.M_W = get_or(jt, "train", "M_W", 0);
    t.K = c.ensemble.K;
    t.epochs = get_or(jt, "train", "epochs", 10000);
    t.lr_gen = get_or(jt, "train", "lr_gen", 1e-3);
    t.lr_test = get_or(jt, "train", "lr_test", 1e-2);
    t.adversary_period = get_or(jt, "train", "adversary_period", 2);
    t.ew_mode = parse_ew_mode(get_or<std::string>(jt, "train", "ew_mode", "batch-mean"));
    t.seed = c.seed;
  }

  // particle
  const json jpa = get_or<json>(j, "", "particle", json::object());
  check_keys(jpa, "particle", {"N", "dt"});
  c.particle.N = get_or(jpa, "particle", "N", 10000);
  c.particle.dt = get_or(jpa, "particle", "dt", 1e-3);

  c.eval_times = get_or<std::vector<double>>(j, "", "eval_times", {0.1, 0.5, 1.0});
  c.eval_sample_count = get_or(j, "", "eval_sample_count", 10000);
  c.verify_suite = get_or<std::string>(j, "", "verify_suite", "all");

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Stationary: return "stationary";
    case RunMode::Transient: return "transient";
    case RunMode::ParticleBaseline: return "particle-baseline";
    case RunMode::Verify: return "verify";
  }
  return "?";
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;

  json jp;
  jp["n"] = c.problem.n;
  jp["theta"] = c.problem.theta;
  jp["sigma"] = c.problem.sigma;
  jp["kernel"] = c.problem.kernel == KernelType::Quadratic ? "quadratic" : "mollified-log";
  jp["kernel_eps"] = c.problem.kernel_eps;
  jp["T"] = c.problem.T;
  jp["Sigma0"] = c.problem.Sigma0;
  const Vec mu0 = c.problem.initial_mean();
  jp["mu0"] = std::vector<double>(mu0.data(), mu0.data() + mu0.size());
  j["problem"] = jp;

  json jn;
  jn["hidden_widths"] = c.hidden_widths;
  jn["base_dist"] = c.base.type == BaseDistType::UniformUnitCube ? "uniform" : "gaussian";
  jn["base_dim"] = c.base.d;
  jn["include_x0_input"] = c.include_x0_input;
  j["network"] = jn;

  json je;
  je["K"] = c.ensemble.K;
  je["sigma_w"] = c.ensemble.sigma_w;
  je["kappa_scale"] = c.ensemble.kappa_scale;
  j["ensemble"] = je;

  json jt;
  if (c.mode == RunMode::Transient) {
    const auto& t = c.time_train;
    jt["epochs"] = t.epochs;
    jt["N_T"] = t.N_T;
    jt["M_per"] = t.M_per;
    jt["M_0"] = t.M_0;
    jt["M_T"] = t.M_T;
    jt["M_W"] = t.M_W;
    jt["lr_gen"] = t.lr_gen;
    jt["lr_test"] = t.lr_test;
    jt["adversary_period"] = t.adversary_period;
    jt["ew_mode"] = t.ew_mode == EwMode::BatchMean ? "batch-mean" : "secondary-sample";
  } else {
    const auto& t = c.stationary_train;
    jt["epochs"] = t.epochs;
    jt["M"] = t.M;
    jt["M_W"] = t.M_W;
    jt["lr_gen"] = t.lr_gen;
    jt["lr_test"] = t.lr_test;
    jt["adversary_period"] = t.adversary_period;
  }
  j["train"] = jt;

  json jpa;
  jpa["N"] = c.particle.N;
  jpa["dt"] = c.particle.dt;
  j["particle"] = jpa;

  j["eval_times"] = c.eval_times;
  j["eval_sample_count"] = c.eval_sample_count;
  j["verify_suite"] = c.verify_suite;
  return j;
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json(config).dump(2) << "\n";
}

}  // namespace mfp
