#include "mra/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "mra/io.hpp"
#include "mra/parallel.hpp"

namespace mra::experiment {

namespace {

namespace fs = std::filesystem;

void ensure_outdir(const std::string& outdir) {
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec && !fs::is_directory(outdir))
    throw std::runtime_error("cannot create output directory: " + outdir);
}

priors::TrueSignal make_truth(const config::ExperimentConfig& cfg) {
  Rng rng(derive_seed(cfg.master_seed, "truth"));
  return priors::make_true_signal(cfg.prior, rng);
}

double relative_error(const Signal& estimate, const Signal& truth) {
  return signal::aligned_distance(estimate, truth) / signal::norm2(truth);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Signal estimate_mps(const config::ExperimentConfig& cfg,
                    const score::ScoreCheckpoint& ckpt,
                    const forward::SampleStats& stats, std::uint64_t seed,
                    mps::PosteriorBatch* batch_out) {
  mps::MpsConfig mcfg = cfg.mps;
  mcfg.seed = seed;
  const mps::ObsContext obs{stats.N, stats.sigma2};
  mps::PosteriorBatch batch = mps::run_posterior_batch(ckpt, stats.pspec, obs, mcfg);
  const Signal est = batch.sample_at(batch.medoid_index);
  if (batch_out) *batch_out = std::move(batch);
  return est;
}

Signal estimate_em(const config::ExperimentConfig& cfg,
                   const forward::MraDataset& dataset, std::uint64_t seed) {
  baselines::EmConfig ecfg = cfg.em;
  ecfg.seed = seed;
  return baselines::em_estimate(dataset, ecfg).estimate;
}

Signal estimate_ips(const config::ExperimentConfig& cfg,
                    const forward::SampleStats& stats, std::uint64_t seed) {
  baselines::IpsConfig icfg = cfg.ips;
  icfg.seed = seed;
  return baselines::ips_estimate(stats, stats.sigma2, icfg).estimate;
}

void write_metrics_files(const std::string& outdir,
                         const std::vector<MetricRecord>& rows) {
  std::ofstream m(outdir + "/metrics.csv", std::ios::trunc);
  if (!m) throw std::runtime_error("cannot write metrics.csv");
  m << metrics_header();
  for (const auto& r : rows) m << metrics_line(r);
  std::ofstream t(outdir + "/timings.csv", std::ios::trunc);
  t << "method,N,repetition,wall_seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%u,%.3f\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.N), r.repetition, r.wall_seconds);
    t << buf;
  }
}

void append_metrics(const std::string& outdir, const MetricRecord& r) {
  const std::string mpath = outdir + "/metrics.csv";
  const bool fresh = !fs::exists(mpath);
  std::ofstream m(mpath, std::ios::app);
  if (fresh) m << metrics_header();
  m << metrics_line(r);
  const std::string tpath = outdir + "/timings.csv";
  const bool tfresh = !fs::exists(tpath);
  std::ofstream t(tpath, std::ios::app);
  if (tfresh) t << "method,N,repetition,wall_seconds\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%llu,%u,%.3f\n", r.method.c_str(),
                static_cast<unsigned long long>(r.N), r.repetition, r.wall_seconds);
  t << buf;
}

void write_plot_data(const std::string& outdir, const std::vector<AggregateRow>& agg) {
  std::map<std::string, std::vector<const AggregateRow*>> by_method;
  for (const auto& row : agg) by_method[row.method].push_back(&row);
  for (const auto& [method, rows] : by_method) {
    std::ofstream f(outdir + "/plot_error_vs_N_" + method + ".dat", std::ios::trunc);
    f << "# N mean_rel_error stderr\n";
    char buf[160];
    for (const auto* r : rows) {
      std::snprintf(buf, sizeof(buf), "%llu %.10g %.10g\n",
                    static_cast<unsigned long long>(r->N), r->mean_rel_error,
                    r->stderr_rel_error);
      f << buf;
    }
  }
}

}  // namespace

std::string metrics_header() {
  return "# schema=mra-metrics-v1\nmethod,N,repetition,rel_error,seed,status\n";
}

std::string metrics_line(const MetricRecord& r) {
  char buf[256];
  if (r.ok) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%u,%.17g,%llu,ok\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.N), r.repetition, r.rel_error,
                  static_cast<unsigned long long>(r.seed));
  } else {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%u,nan,%llu,error\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.N), r.repetition,
                  static_cast<unsigned long long>(r.seed));
  }
  return buf;
}

void run_simulate(const config::ExperimentConfig& cfg, bool stats_only,
                  bool csv_export) {
  ensure_outdir(cfg.outdir);
  const priors::TrueSignal truth = make_truth(cfg);
  io::write_signal(truth.x, cfg.outdir + "/truth.sig");
  const std::uint64_t N = cfg.n_list.front();
  const std::uint64_t data_seed = derive_seed(cfg.master_seed, "data", N, 0);
  const forward::SampleStats stats =
      forward::stream_stats(truth.x, N, cfg.sigma2, data_seed, true);
  io::write_stats(stats, cfg.outdir + "/stats.mst");
  if (!stats_only) {
    const forward::MraDataset d =
        forward::generate_observations(truth.x, N, cfg.sigma2, data_seed);
    io::write_dataset(d, cfg.outdir + "/dataset.mra");
    if (csv_export) io::write_dataset_csv(d, cfg.outdir + "/dataset.csv");
  }
}

std::string run_train(const config::ExperimentConfig& cfg) {
  ensure_outdir(cfg.outdir);
  score::TrainConfig tcfg = cfg.train;
  tcfg.seed = derive_seed(cfg.master_seed, "train-prior");
  if (tcfg.log_path.empty()) tcfg.log_path = cfg.outdir + "/train_log.csv";
  const score::ScoreCheckpoint ckpt = score::train(cfg.prior, tcfg);
  const std::string path =
      cfg.checkpoint.empty() ? cfg.outdir + "/score.ckpt" : cfg.checkpoint;
  score::save_checkpoint(ckpt, path);
  std::printf("trained %s prior: %zu parameters, final loss %.6f -> %s\n",
              priors::to_string(cfg.prior.kind).c_str(), ckpt.net.param_count(),
              ckpt.final_loss, path.c_str());
  return path;
}

MetricRecord run_method(const config::ExperimentConfig& cfg, config::Method method,
                        const RunInputs& inputs) {
  ensure_outdir(cfg.outdir);
  MetricRecord rec;
  rec.method = config::to_string(method);
  rec.repetition = 0;
  rec.seed = derive_seed(cfg.master_seed, rec.method, 0, 0);
  Timer timer;

  Signal estimate;
  std::uint64_t n = 0;
  if (method == config::Method::Em) {
    if (inputs.dataset.empty())
      throw std::invalid_argument("run: EM requires --dataset");
    const forward::MraDataset d = io::read_dataset(inputs.dataset);
    n = d.N;
    estimate = estimate_em(cfg, d, rec.seed);
  } else {
    if (inputs.stats.empty())
      throw std::invalid_argument("run: " + rec.method + " requires --stats");
    const forward::SampleStats stats = io::read_stats(inputs.stats);
    n = stats.N;
    if (method == config::Method::Ips) {
      estimate = estimate_ips(cfg, stats, rec.seed);
    } else {
      if (inputs.checkpoint.empty())
        throw std::invalid_argument("run: MPS requires --checkpoint");
      const score::ScoreCheckpoint ckpt =
          score::load_checkpoint(inputs.checkpoint, stats.L);
      mps::PosteriorBatch batch;
      estimate = estimate_mps(cfg, ckpt, stats, rec.seed, &batch);
      io::write_posterior_batch(batch, cfg.outdir + "/posterior_batch.pbs");
      if (batch.J >= 2)
        io::write_summary_csv(mps::posterior_summary(batch),
                              cfg.outdir + "/posterior_summary.csv");
    }
  }
  rec.N = n;
  io::write_signal(estimate, cfg.outdir + "/estimate_" + rec.method + ".sig");
  if (!inputs.truth.empty()) {
    const Signal truth = io::read_signal(inputs.truth);
    rec.rel_error = relative_error(estimate, truth);
  } else {
    rec.rel_error = std::nan("");
  }
  rec.wall_seconds = timer.seconds();
  append_metrics(cfg.outdir, rec);
  return rec;
}

std::vector<MetricRecord> run_experiment(const config::ExperimentConfig& cfg) {
  ensure_outdir(cfg.outdir);
  const priors::TrueSignal truth = make_truth(cfg);
  io::write_signal(truth.x, cfg.outdir + "/truth.sig");

  const bool wants_mps = std::find(cfg.methods.begin(), cfg.methods.end(),
                                   config::Method::Mps) != cfg.methods.end();
  const bool wants_em = std::find(cfg.methods.begin(), cfg.methods.end(),
                                  config::Method::Em) != cfg.methods.end();
  const bool wants_ips = std::find(cfg.methods.begin(), cfg.methods.end(),
                                   config::Method::Ips) != cfg.methods.end();
  score::ScoreCheckpoint ckpt;
  if (wants_mps) ckpt = score::load_checkpoint(cfg.checkpoint, cfg.prior.L);

  struct Cell {
    std::uint64_t N;
    std::uint32_t rep;
  };
  std::vector<Cell> cells;
  for (std::uint64_t n : cfg.n_list)
    for (std::uint32_t r = 0; r < cfg.repetitions; ++r) cells.push_back({n, r});

  const std::uint64_t max_n = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
  std::vector<std::vector<MetricRecord>> cell_rows(cells.size());
  // Best aligned estimates at the largest N (first repetition) for overlays.
  std::map<std::string, Signal> overlay;
  std::mutex overlay_mutex;

  auto run_cell = [&](std::size_t idx) {
    const Cell cell = cells[idx];
    const std::uint64_t data_seed =
        derive_seed(cfg.master_seed, "data", cell.N, cell.rep);
    forward::SampleStats stats =
        forward::stream_stats(truth.x, cell.N, cfg.sigma2, data_seed, wants_ips);
    std::optional<forward::MraDataset> dataset;
    if (wants_em)
      dataset = forward::generate_observations(truth.x, cell.N, cfg.sigma2, data_seed);

    for (config::Method method : cfg.methods) {
      MetricRecord rec;
      rec.method = config::to_string(method);
      rec.N = cell.N;
      rec.repetition = cell.rep;
      rec.seed = derive_seed(cfg.master_seed, rec.method, cell.N, cell.rep);
      Timer timer;
      try {
        Signal est;
        switch (method) {
          case config::Method::Mps:
            est = estimate_mps(cfg, ckpt, stats, rec.seed, nullptr);
            break;
          case config::Method::Em:
            est = estimate_em(cfg, *dataset, rec.seed);
            break;
          case config::Method::Ips:
            est = estimate_ips(cfg, stats, rec.seed);
            break;
        }
        rec.rel_error = relative_error(est, truth.x);
        rec.ok = true;
        io::write_signal(est, cfg.outdir + "/estimate_" + rec.method + "_N" +
                                  std::to_string(cell.N) + "_r" +
                                  std::to_string(cell.rep) + ".sig");
        if (cell.N == max_n && cell.rep == 0) {
          const Signal aligned =
              signal::cyclic_shift(est, signal::best_alignment(est, truth.x));
          std::lock_guard<std::mutex> lock(overlay_mutex);
          overlay[rec.method] = aligned;
        }
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        rec.rel_error = std::nan("");
        std::fprintf(stderr, "cell failed: %s N=%llu rep=%u: %s\n",
                     rec.method.c_str(), static_cast<unsigned long long>(cell.N),
                     cell.rep, e.what());
      }
      rec.wall_seconds = timer.seconds();
      cell_rows[idx].push_back(rec);
    }
  };

  if (cfg.workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    parallel_chunks(cells.size(), cfg.workers, [&](int, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) run_cell(i);
    });
  }

  // Rows land in canonical (N, repetition, method) order no matter how the
  // pool scheduled the cells.
  std::vector<MetricRecord> rows;
  for (const auto& cr : cell_rows) rows.insert(rows.end(), cr.begin(), cr.end());
  write_metrics_files(cfg.outdir, rows);
  write_plot_data(cfg.outdir, aggregate(rows));

  if (!overlay.empty()) {
    std::ofstream f(cfg.outdir + "/plot_overlay_N" + std::to_string(max_n) + ".csv",
                    std::ios::trunc);
    f << "component,truth";
    for (const auto& [m, _] : overlay) f << "," << m;
    f << "\n";
    char buf[64];
    for (std::uint32_t c = 0; c < cfg.prior.L; ++c) {
      std::snprintf(buf, sizeof(buf), "%u,%.10g", c, truth.x[c]);
      f << buf;
      for (const auto& [m, sig] : overlay) {
        std::snprintf(buf, sizeof(buf), ",%.10g", sig[c]);
        f << buf;
      }
      f << "\n";
    }
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<MetricRecord>& rows) {
  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> groups;
  for (const auto& r : rows)
    if (r.ok && std::isfinite(r.rel_error))
      groups[{r.method, r.N}].push_back(r.rel_error);
  std::vector<AggregateRow> out;
  for (const auto& [key, vals] : groups) {
    AggregateRow row;
    row.method = key.first;
    row.N = key.second;
    row.count = vals.size();
    double s = 0.0;
    for (double v : vals) s += v;
    row.mean_rel_error = s / static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double s2 = 0.0;
      for (double v : vals) s2 += (v - row.mean_rel_error) * (v - row.mean_rel_error);
      row.stderr_rel_error =
          std::sqrt(s2 / static_cast<double>(vals.size() - 1)) /
          std::sqrt(static_cast<double>(vals.size()));
    } else {
      row.stderr_rel_error = std::nan("");
    }
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const AggregateRow& a, const AggregateRow& b) {
    return a.method != b.method ? a.method < b.method : a.N < b.N;
  });
  return out;
}

std::vector<AggregateRow> run_summarize(const std::string& metrics_path,
                                        const std::string& outdir) {
  std::ifstream f(metrics_path);
  if (!f) throw std::runtime_error("summarize: cannot open " + metrics_path);
  std::vector<MetricRecord> rows;
  std::string line;
  int lineno = 0;
  int bad = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("method,", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string method, n_str, rep_str, err_str, seed_str, status;
    if (!std::getline(ss, method, ',') || !std::getline(ss, n_str, ',') ||
        !std::getline(ss, rep_str, ',') || !std::getline(ss, err_str, ',') ||
        !std::getline(ss, seed_str, ',') || !std::getline(ss, status)) {
      std::fprintf(stderr, "summarize: malformed row at line %d: %s\n", lineno,
                   line.c_str());
      ++bad;
      continue;
    }
    try {
      MetricRecord r;
      r.method = method;
      r.N = std::stoull(n_str);
      r.repetition = static_cast<std::uint32_t>(std::stoul(rep_str));
      r.rel_error = std::stod(err_str);
      r.seed = std::stoull(seed_str);
      r.ok = status == "ok";
      rows.push_back(r);
    } catch (...) {
      std::fprintf(stderr, "summarize: malformed row at line %d: %s\n", lineno,
                   line.c_str());
      ++bad;
    }
  }
  const auto agg = aggregate(rows);
  if (agg.empty()) {
    std::printf("no usable metric rows%s\n", bad ? " (all rows malformed)" : "");
  } else {
    std::printf("%-6s %12s %14s %14s %6s\n", "method", "N", "mean_rel_err",
                "stderr", "n");
    for (const auto& a : agg) {
      if (std::isnan(a.stderr_rel_error))
        std::printf("%-6s %12llu %14.6g %14s %6zu\n", a.method.c_str(),
                    static_cast<unsigned long long>(a.N), a.mean_rel_error, "",
                    a.count);
      else
        std::printf("%-6s %12llu %14.6g %14.6g %6zu\n", a.method.c_str(),
                    static_cast<unsigned long long>(a.N), a.mean_rel_error,
                    a.stderr_rel_error, a.count);
    }
  }
  if (!outdir.empty()) {
    ensure_outdir(outdir);
    write_plot_data(outdir, agg);
  }
  return agg;
}

}  // namespace mra::experiment
