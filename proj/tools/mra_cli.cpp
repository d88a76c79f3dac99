#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "mra/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

mra::config::ExperimentConfig load_or_exit(const std::string& path) {
  auto parsed = mra::config::load_config(path);
  if (!parsed.ok()) {
    std::fprintf(stderr, "config validation failed (%s):\n", path.c_str());
    for (const auto& e : parsed.errors) std::fprintf(stderr, "  - %s\n", e.c_str());
    std::exit(kExitValidation);
  }
  return parsed.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mra: multi-reference alignment toolkit (MPS, EM, IPS)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string method;
  std::string dataset_path, stats_path, ckpt_path, truth_path;
  std::string metrics_path, summarize_outdir;
  bool stats_only = false, csv_export = false;

  auto* simulate = app.add_subcommand(
      "simulate", "Generate an MRA dataset and its shift-invariant statistics");
  simulate->add_option("--config", config_path, "experiment config file")->required();
  simulate->add_flag("--stats-only", stats_only,
                     "stream statistics without materializing the dataset");
  simulate->add_flag("--csv", csv_export, "also export the dataset as CSV");

  auto* train = app.add_subcommand("train-prior",
                                   "Train the score-model checkpoint for the prior");
  train->add_option("--config", config_path, "experiment config file")->required();

  auto* run = app.add_subcommand("run", "Run one method on prepared inputs");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--method", method, "mps|em|ips")->required();
  run->add_option("--dataset", dataset_path, "dataset file (EM)");
  run->add_option("--stats", stats_path, "statistics file (MPS, IPS)");
  run->add_option("--checkpoint", ckpt_path, "score checkpoint (MPS)");
  run->add_option("--truth", truth_path, "true signal file for the error metric");

  auto* experiment = app.add_subcommand(
      "experiment", "Full N-sweep with repetitions over the configured methods");
  experiment->add_option("--config", config_path, "experiment config file")->required();

  auto* summarize = app.add_subcommand("summarize",
                                       "Aggregate a metrics CSV into a table + plot data");
  summarize->add_option("--metrics", metrics_path, "metrics.csv path")->required();
  summarize->add_option("--outdir", summarize_outdir, "directory for plot data files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      mra::experiment::run_simulate(load_or_exit(config_path), stats_only, csv_export);
    } else if (train->parsed()) {
      mra::experiment::run_train(load_or_exit(config_path));
    } else if (run->parsed()) {
      auto cfg = load_or_exit(config_path);
      mra::config::Method m;
      if (method == "mps") m = mra::config::Method::Mps;
      else if (method == "em") m = mra::config::Method::Em;
      else if (method == "ips") m = mra::config::Method::Ips;
      else {
        std::fprintf(stderr, "unknown method '%s' (expected mps|em|ips)\n",
                     method.c_str());
        return kExitValidation;
      }
      mra::experiment::RunInputs inputs{dataset_path, stats_path, ckpt_path, truth_path};
      const auto rec = mra::experiment::run_method(cfg, m, inputs);
      std::printf("%s: N=%llu rel_error=%.6g (%.2fs)\n", rec.method.c_str(),
                  static_cast<unsigned long long>(rec.N), rec.rel_error,
                  rec.wall_seconds);
    } else if (experiment->parsed()) {
      const auto rows = mra::experiment::run_experiment(load_or_exit(config_path));
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.ok ? 0 : 1;
      std::printf("experiment complete: %zu cells, %zu failed\n", rows.size(), failed);
      if (failed == rows.size() && !rows.empty()) return kExitRuntime;
    } else if (summarize->parsed()) {
      mra::experiment::run_summarize(metrics_path, summarize_outdir);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
