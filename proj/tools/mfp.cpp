// mfp: train neural pushforward samplers for mean-field Fokker-Planck
// problems, run the interacting-particle baseline, and verify the numerics.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfp/io.hpp"
#include "mfp/verify.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> output_dir;
  std::optional<int> K;
  std::optional<int> M;
  std::optional<double> sigma_w;
  std::optional<double> lr_gen;
  std::optional<double> lr_test;
  std::optional<int> eval_samples;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Override config seed");
  cmd->add_option("--epochs", ov.epochs, "Override training epochs");
  cmd->add_option("--output-dir", ov.output_dir, "Override output directory");
  cmd->add_option("--K", ov.K, "Override test-function count");
  cmd->add_option("--M", ov.M, "Override primary batch size");
  cmd->add_option("--sigma-w", ov.sigma_w, "Override frequency init scale");
  cmd->add_option("--lr-gen", ov.lr_gen, "Override generator learning rate");
  cmd->add_option("--lr-test", ov.lr_test, "Override adversary learning rate");
  cmd->add_option("--eval-samples", ov.eval_samples, "Override evaluation sample count");
}

void apply_overrides(mfp::RunConfig& config, const Overrides& ov) {
  if (ov.seed) {
    config.seed = *ov.seed;
    config.stationary_train.seed = *ov.seed;
    config.time_train.seed = *ov.seed;
  }
  if (ov.epochs) {
    config.stationary_train.epochs = *ov.epochs;
    config.time_train.epochs = *ov.epochs;
  }
  if (ov.output_dir) config.output_dir = *ov.output_dir;
  if (ov.K) {
    config.ensemble.K = *ov.K;
    config.stationary_train.K = *ov.K;
    config.time_train.K = *ov.K;
  }
  if (ov.M) {
    config.stationary_train.M = *ov.M;
    config.time_train.M_per = std::max(1, *ov.M / config.time_train.N_T);
  }
  if (ov.sigma_w) config.ensemble.sigma_w = *ov.sigma_w;
  if (ov.lr_gen) {
    config.stationary_train.lr_gen = *ov.lr_gen;
    config.time_train.lr_gen = *ov.lr_gen;
  }
  if (ov.lr_test) {
    config.stationary_train.lr_test = *ov.lr_test;
    config.time_train.lr_test = *ov.lr_test;
  }
  if (ov.eval_samples) config.eval_sample_count = *ov.eval_samples;
}

int run_mode(const std::string& config_path, mfp::RunMode mode, const Overrides& ov) {
  mfp::RunConfig config = mfp::load_config(config_path);
  if (config.mode != mode) {
    std::cerr << "note: config mode '" << mfp::to_string(config.mode)
              << "' overridden to '" << mfp::to_string(mode) << "'\n";
    config.mode = mode;
  }
  apply_overrides(config, ov);
  config.validate();
  return mfp::run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural pushforward solver for mean-field Fokker-Planck equations"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for batch evaluation (0 = default)");

  std::string config_path;
  Overrides ov;

  auto* solve = app.add_subcommand("solve", "Train a pushforward sampler");
  solve->require_subcommand(1);
  auto* solve_stat = solve->add_subcommand("stationary", "Stationary problem");
  auto* solve_trans = solve->add_subcommand("transient", "Time-dependent problem");
  for (auto* cmd : {solve_stat, solve_trans}) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    add_override_flags(cmd, ov);
  }

  auto* particle = app.add_subcommand("particle-baseline",
                                      "Euler-Maruyama interacting-particle baseline");
  particle->add_option("--config", config_path, "JSON config file")->required();
  particle->add_option("--seed", ov.seed, "Override config seed");
  particle->add_option("--output-dir", ov.output_dir, "Override output directory");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run a no-training verification suite");
  verify->add_option("--suite", suite, "Suite name (or 'all')")
      ->check(CLI::IsMember([] {
        auto names = mfp::verify_suite_names();
        names.push_back("all");
        return names;
      }()));

  std::string ckpt_path;
  std::vector<double> times = {0.1, 0.5, 1.0};
  int metric_samples = 10000;
  std::uint64_t metric_seed = 0;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Moment metrics for a saved checkpoint");
  metrics->add_option("--checkpoint", ckpt_path, "checkpoint.json path")->required();
  metrics->add_option("--times", times, "Evaluation times t1,t2,...")->delimiter(',');
  metrics->add_option("--samples", metric_samples, "Samples per evaluation time");
  metrics->add_option("--seed", metric_seed, "Sampling seed");
  metrics->add_option("--out", metrics_out, "Write metrics.json to this path");

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (solve_stat->parsed()) return run_mode(config_path, mfp::RunMode::Stationary, ov);
    if (solve_trans->parsed()) return run_mode(config_path, mfp::RunMode::Transient, ov);
    if (particle->parsed()) return run_mode(config_path, mfp::RunMode::ParticleBaseline, ov);
    if (verify->parsed()) {
      const auto results = mfp::verify_suite(suite);
      for (const auto& r : results)
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
                  << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
      return mfp::all_passed(results) ? 0 : 1;
    }
    if (metrics->parsed()) {
      const mfp::Checkpoint ckpt = mfp::load_checkpoint(ckpt_path);
      const mfp::MetricsReport report =
          mfp::metrics_from_checkpoint(ckpt, times, metric_samples, metric_seed);
      for (const auto& tm : report.per_time)
        std::cout << "t=" << tm.t << "  avg|m_err|=" << tm.avg_abs_mean_err
                  << "  avg|var_err|=" << tm.avg_abs_var_err
                  << "  l2(m_err)=" << tm.l2_mean_err
                  << "  l2(var_err)=" << tm.l2_var_err << "\n";
      if (!metrics_out.empty()) mfp::write_metrics_json(metrics_out, report);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
