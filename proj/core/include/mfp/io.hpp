#pragma once

#include <string>
#include <vector>

#include "mfp/config.hpp"
#include "mfp/ensemble.hpp"
#include "mfp/metrics.hpp"

namespace mfp {

/// Full round-trip decimal formatting (17 significant digits).
std::string format_full(double x);

/// Comma-separated with a header row; every numeric cell uses format_full.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& data);
Mat read_csv(const std::string& path, std::vector<std::string>* header = nullptr);

void write_loss_history(const std::string& path, const std::vector<double>& losses);
/// Columns: t, m_1..m_n, var_1..var_n.
void write_moments_csv(const std::string& path, const MomentTrajectory& traj);
void write_samples_csv(const std::string& path, const Mat& samples);
void write_metrics_json(const std::string& path, const MetricsReport& report);

/// Versioned container for a trained run: network spec + flat parameters,
/// ensemble parameters, problem and config snapshot, seed.
struct Checkpoint {
  int schema_version = 1;
  RunMode mode = RunMode::Stationary;
  MlpSpec network;
  Vec params;
  BaseDist base;
  bool include_x0_input = false;
  ProblemSpec problem;
  PlaneWaveEnsemble ensemble;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const RunConfig* config_snapshot = nullptr);
Checkpoint load_checkpoint(const std::string& path);

/// Execute the configured mode and write its output files into
/// config.output_dir. Returns a process exit status (0 on success); training
/// divergence is reported as a diagnostic plus nonzero status.
int run(const RunConfig& config);

/// Sample a reloaded checkpoint at the given times (transient) or once
/// (stationary, times ignored) and compute metrics against the exact moments.
MetricsReport metrics_from_checkpoint(const Checkpoint& ckpt,
                                      const std::vector<double>& times,
                                      int sample_count, std::uint64_t seed);

}  // namespace mfp
