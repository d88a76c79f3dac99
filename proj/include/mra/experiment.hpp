#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mra/config.hpp"

namespace mra::experiment {

// One deterministic row of the metrics CSV; wall time goes to timings.csv so
// reruns of metrics.csv are byte-identical.
struct MetricRecord {
  std::string method;
  std::uint64_t N = 0;
  std::uint32_t repetition = 0;
  double rel_error = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double wall_seconds = 0.0;
};

// Writes <outdir>/dataset.mra (unless stats_only), <outdir>/stats.mst and
// <outdir>/truth.sig for the configured prior; csv_export additionally writes
// dataset.csv. Uses N = first entry of n_list.
void run_simulate(const config::ExperimentConfig& cfg, bool stats_only,
                  bool csv_export);

// Trains the score checkpoint for the configured prior and writes it to
// cfg.checkpoint (or <outdir>/score.ckpt when empty). Returns the path.
std::string run_train(const config::ExperimentConfig& cfg);

struct RunInputs {
  std::string dataset;     // EM
  std::string stats;       // MPS, IPS
  std::string checkpoint;  // MPS
  std::string truth;       // optional; enables the relative-error metric
};

// Runs one method, writes <outdir>/estimate_<method>.sig (plus posterior batch
// and summary for MPS), appends to <outdir>/metrics.csv and timings.csv.
MetricRecord run_method(const config::ExperimentConfig& cfg, config::Method method,
                        const RunInputs& inputs);

// The full N x repetitions x methods sweep with one fixed true signal.
// Writes metrics.csv, timings.csv, per-method aggregate plot data, and the
// best aligned estimates at the largest N.
std::vector<MetricRecord> run_experiment(const config::ExperimentConfig& cfg);

struct AggregateRow {
  std::string method;
  std::uint64_t N;
  double mean_rel_error;
  double stderr_rel_error;  // blank in output when only one repetition
  std::size_t count;
};

// Parses a metrics CSV (reporting malformed lines by number), prints the
// method x N table, and emits per-method XY plot files under outdir.
std::vector<AggregateRow> run_summarize(const std::string& metrics_path,
                                        const std::string& outdir);

// Aggregation used by run_summarize; exposed for the fixture test.
std::vector<AggregateRow> aggregate(const std::vector<MetricRecord>& rows);

std::string metrics_header();
std::string metrics_line(const MetricRecord& r);

}  // namespace mra::experiment
