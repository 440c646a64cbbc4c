#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "mfp/problem.hpp"
#include "mfp/pushforward.hpp"
#include "mfp/stationary.hpp"
#include "mfp/timedep.hpp"

namespace mfp {

enum class RunMode { Stationary, Transient, ParticleBaseline, Verify };

struct EnsembleConfig {
  int K = 2000;
  double sigma_w = 0;  // resolved value ("auto" resolves via default_frequency_scale)
  double kappa_scale = 0;  // resolved; used in transient mode only
};

struct ParticleConfig {
  int N = 10000;
  double dt = 1e-3;
};

/// Fully resolved run description. load_config() validates the file (unknown
/// keys are errors), fills defaults and resolves "auto" frequency scales, so
/// a RunConfig is always internally consistent.
struct RunConfig {
  int schema_version = 1;
  RunMode mode = RunMode::Stationary;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  ProblemSpec problem;
  std::vector<int> hidden_widths = {128, 128, 128};
  BaseDist base;
  bool include_x0_input = false;

  StationaryTrainConfig stationary_train;
  TimeTrainConfig time_train;
  EnsembleConfig ensemble;
  ParticleConfig particle;

  std::vector<double> eval_times = {0.1, 0.5, 1.0};
  int eval_sample_count = 10000;
  std::string verify_suite = "all";

  /// Network architecture implied by the mode (input layout differs between
  /// the stationary map and the time map).
  MlpSpec network_spec() const;
  void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

std::string to_string(RunMode mode);

}  // namespace mfp
