#include "mra/score_net.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mra/parallel.hpp"

namespace mra::score {

namespace {

// out[j] += w * in[(j + off) mod L], wraparound handled by range splitting.
void add_shifted(double* out, const double* in, double w, int off, int L) {
  if (off >= 0) {
    for (int j = 0; j < L - off; ++j) out[j] += w * in[j + off];
    for (int j = L - off; j < L; ++j) out[j] += w * in[j + off - L];
  } else {
    for (int j = 0; j < -off; ++j) out[j] += w * in[j + off + L];
    for (int j = -off; j < L; ++j) out[j] += w * in[j + off];
  }
}

double dot_shifted(const double* a, const double* in, int off, int L) {
  double s = 0.0;
  if (off >= 0) {
    for (int j = 0; j < L - off; ++j) s += a[j] * in[j + off];
    for (int j = L - off; j < L; ++j) s += a[j] * in[j + off - L];
  } else {
    for (int j = 0; j < -off; ++j) s += a[j] * in[j + off + L];
    for (int j = -off; j < L; ++j) s += a[j] * in[j + off];
  }
  return s;
}

}  // namespace

ScoreNet make_score_net(std::uint32_t channels, std::uint32_t n_layers,
                        std::uint32_t kernel, double schedule_base) {
  if (channels < 1 || n_layers < 1 || kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("make_score_net: bad architecture (kernel must be odd)");
  ScoreNet net;
  net.channels = channels;
  net.n_layers = n_layers;
  net.kernel = kernel;
  net.sched.base = schedule_base;
  std::size_t off = 0;
  auto push = [&](std::uint32_t in_c, std::uint32_t out_c, std::uint32_t k) {
    ScoreNet::TensorDesc d{in_c, out_c, k, off, 0};
    off += static_cast<std::size_t>(in_c) * out_c * k;
    d.b_off = off;
    off += out_c;
    net.tensors.push_back(d);
  };
  push(2, channels, kernel);
  for (std::uint32_t i = 1; i < n_layers; ++i) push(channels, channels, kernel);
  push(channels, 1, 1);  // final projection
  net.params.assign(off, 0.0f);
  return net;
}

void init_weights(ScoreNet& net, Rng& rng) {
  for (const auto& t : net.tensors) {
    const double stddev = std::sqrt(2.0 / (static_cast<double>(t.in_c) * t.k));
    const std::size_t nw = static_cast<std::size_t>(t.in_c) * t.out_c * t.k;
    for (std::size_t i = 0; i < nw; ++i)
      net.params[t.w_off + i] = static_cast<float>(stddev * rng.normal());
    for (std::uint32_t i = 0; i < t.out_c; ++i) net.params[t.b_off + i] = 0.0f;
  }
}

void workspace_init(NetWorkspace& ws, const ScoreNet& net, std::uint32_t L) {
  const std::size_t n = net.tensors.size();
  ws.L = L;
  ws.acts.assign(n, {});
  ws.pre.assign(n, {});
  ws.dact.assign(n + 1, {});
  for (std::size_t i = 0; i < n; ++i) {
    ws.acts[i].assign(static_cast<std::size_t>(net.tensors[i].in_c) * L, 0.0);
    ws.pre[i].assign(static_cast<std::size_t>(net.tensors[i].out_c) * L, 0.0);
    ws.dact[i].assign(ws.acts[i].size(), 0.0);
  }
  ws.dact[n].assign(L, 0.0);
}

const std::vector<double>& net_forward(const ScoreNet& net, const double* x,
                                       double cond_value, NetWorkspace& ws) {
  const int L = static_cast<int>(ws.L);
  const std::size_t n = net.tensors.size();
  // Input channels: signal, then the constant conditioning channel.
  for (int j = 0; j < L; ++j) {
    ws.acts[0][j] = x[j];
    ws.acts[0][L + j] = cond_value;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& td = net.tensors[i];
    const int half = static_cast<int>(td.k) / 2;
    const double* in = ws.acts[i].data();
    double* out = ws.pre[i].data();
    for (std::uint32_t oc = 0; oc < td.out_c; ++oc) {
      double* row = out + static_cast<std::size_t>(oc) * L;
      const double bias = net.params[td.b_off + oc];
      for (int j = 0; j < L; ++j) row[j] = bias;
      for (std::uint32_t ic = 0; ic < td.in_c; ++ic) {
        const double* irow = in + static_cast<std::size_t>(ic) * L;
        const float* w = net.params.data() + td.w_off +
                         (static_cast<std::size_t>(oc) * td.in_c + ic) * td.k;
        for (std::uint32_t dj = 0; dj < td.k; ++dj)
          add_shifted(row, irow, w[dj], static_cast<int>(dj) - half, L);
      }
    }
    if (i + 1 < n) {
      // ReLU into the next layer's input.
      double* nxt = ws.acts[i + 1].data();
      for (std::size_t j = 0; j < ws.pre[i].size(); ++j)
        nxt[j] = ws.pre[i][j] > 0.0 ? ws.pre[i][j] : 0.0;
    }
  }
  return ws.pre[n - 1];
}

void net_backward(const ScoreNet& net, NetWorkspace& ws, const double* d_raw,
                  double* grad) {
  const int L = static_cast<int>(ws.L);
  const std::size_t n = net.tensors.size();
  std::memcpy(ws.dact[n].data(), d_raw, sizeof(double) * L);
  for (std::size_t i = n; i-- > 0;) {
    const auto& td = net.tensors[i];
    const int half = static_cast<int>(td.k) / 2;
    // d(pre_i): apply ReLU mask except for the projection output.
    std::vector<double>& dout = ws.dact[i + 1];
    if (i + 1 < n) {
      for (std::size_t j = 0; j < dout.size(); ++j)
        if (ws.pre[i][j] <= 0.0) dout[j] = 0.0;
    }
    std::vector<double>& din = ws.dact[i];
    std::fill(din.begin(), din.end(), 0.0);
    const double* in = ws.acts[i].data();
    for (std::uint32_t oc = 0; oc < td.out_c; ++oc) {
      const double* drow = dout.data() + static_cast<std::size_t>(oc) * L;
      double gb = 0.0;
      for (int j = 0; j < L; ++j) gb += drow[j];
      grad[td.b_off + oc] += gb;
      for (std::uint32_t ic = 0; ic < td.in_c; ++ic) {
        const double* irow = in + static_cast<std::size_t>(ic) * L;
        double* dirow = din.data() + static_cast<std::size_t>(ic) * L;
        const std::size_t wbase = td.w_off +
                                  (static_cast<std::size_t>(oc) * td.in_c + ic) * td.k;
        for (std::uint32_t dj = 0; dj < td.k; ++dj) {
          const int off = static_cast<int>(dj) - half;
          grad[wbase + dj] += dot_shifted(drow, irow, off, L);
          add_shifted(dirow, drow, net.params[wbase + dj], -off, L);
        }
      }
    }
  }
}

// Conditioning channel value: the log of the perturbation variance, which
// spreads the noise levels the net must distinguish across a wide range.
static double cond_value(const diffusion::DiffusionSchedule& sched, double t) {
  return std::log(sched.perturb_var(t));
}

Signal score_eval(const ScoreNet& net, const Signal& x_centered, double t) {
  if (!(t > 0.0 && t <= 1.0))
    throw std::invalid_argument("score_eval: t must be in (0, 1]");
  NetWorkspace ws;
  workspace_init(ws, net, static_cast<std::uint32_t>(x_centered.size()));
  const double cond = cond_value(net.sched, t);
  const auto& raw = net_forward(net, x_centered.data(), cond, ws);
  const double inv_std = 1.0 / net.sched.perturb_std(t);
  Signal out(x_centered.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = raw[j] * inv_std;
  return out;
}

namespace {

struct BatchDraws {
  std::vector<double> noisy;  // batch x L
  std::vector<double> g;      // batch x L
  std::vector<double> cond;   // batch
};

double draw_time(double t_min, TSampling rule,
                 const diffusion::DiffusionSchedule& sched, Rng& rng) {
  if (rule == TSampling::UniformT) return t_min + (1.0 - t_min) * rng.uniform_co();
  const double lo = std::log(sched.perturb_var(t_min));
  const double hi = std::log(sched.perturb_var(1.0));
  const double var = std::exp(lo + (hi - lo) * rng.uniform_co());
  return std::log(1.0 + var) / (2.0 * std::log(sched.base));
}

// Serial draw of every random input for the batch; keeps training
// deterministic no matter how the compute is threaded.
void draw_batch(const std::vector<Signal>& centered, double t_min, TSampling rule,
                const diffusion::DiffusionSchedule& sched, Rng& rng,
                BatchDraws& out) {
  const std::size_t B = centered.size();
  const std::size_t L = centered[0].size();
  out.noisy.resize(B * L);
  out.g.resize(B * L);
  out.cond.resize(B);
  for (std::size_t s = 0; s < B; ++s) {
    const double t = draw_time(t_min, rule, sched, rng);
    const double std_t = sched.perturb_std(t);
    out.cond[s] = std::log(sched.perturb_var(t));
    for (std::size_t j = 0; j < L; ++j) {
      const double gj = rng.normal();
      out.g[s * L + j] = gj;
      out.noisy[s * L + j] = centered[s][j] + std_t * gj;
    }
  }
}

double batch_loss_and_grads(const ScoreNet& net, const BatchDraws& draws,
                            std::size_t B, std::uint32_t L,
                            std::vector<double>* grad_out) {
  const std::size_t P = net.param_count();
  std::vector<double> sample_loss(B, 0.0);
  std::vector<double> sample_grad;
  if (grad_out) sample_grad.assign(B * P, 0.0);
  const int workers = worker_count();
  parallel_chunks(B, workers, [&](int, std::size_t b, std::size_t e) {
    NetWorkspace ws;
    workspace_init(ws, net, L);
    std::vector<double> dr(L);
    for (std::size_t s = b; s < e; ++s) {
      const auto& raw = net_forward(net, draws.noisy.data() + s * L, draws.cond[s], ws);
      double loss = 0.0;
      for (std::uint32_t j = 0; j < L; ++j) {
        const double r = raw[j] + draws.g[s * L + j];
        loss += r * r;
        dr[j] = 2.0 * r / static_cast<double>(B);
      }
      sample_loss[s] = loss;
      if (grad_out) net_backward(net, ws, dr.data(), sample_grad.data() + s * P);
    }
  });
  if (grad_out) {
    grad_out->assign(P, 0.0);
    for (std::size_t s = 0; s < B; ++s) {
      const double* g = sample_grad.data() + s * P;
      for (std::size_t i = 0; i < P; ++i) (*grad_out)[i] += g[i];
    }
  }
  double total = 0.0;
  for (double l : sample_loss) total += l;
  return total / static_cast<double>(B);
}

}  // namespace

double dsm_loss(const ScoreNet& net, const std::vector<Signal>& centered_batch,
                double t_min, Rng& rng) {
  if (centered_batch.empty()) throw std::invalid_argument("dsm_loss: empty batch");
  const std::uint32_t L = static_cast<std::uint32_t>(centered_batch[0].size());
  BatchDraws draws;
  draw_batch(centered_batch, t_min, TSampling::UniformT, net.sched, rng, draws);
  return batch_loss_and_grads(net, draws, centered_batch.size(), L, nullptr);
}

double dsm_loss_and_grad(const ScoreNet& net,
                         const std::vector<Signal>& centered_batch, double t_min,
                         Rng& rng, std::vector<double>& grad) {
  if (centered_batch.empty()) throw std::invalid_argument("dsm_loss: empty batch");
  const std::uint32_t L = static_cast<std::uint32_t>(centered_batch[0].size());
  BatchDraws draws;
  draw_batch(centered_batch, t_min, TSampling::UniformT, net.sched, rng, draws);
  return batch_loss_and_grads(net, draws, centered_batch.size(), L, &grad);
}

ScoreCheckpoint train(const priors::PriorSpec& spec, const TrainConfig& cfg) {
  Rng mean_rng(derive_seed(cfg.seed, "prior-mean"));
  const Signal mean = priors::prior_mean(spec, cfg.mean_samples, mean_rng);
  const PriorSampler sampler = [&spec](Rng& r) { return priors::sample_prior(spec, r); };
  return train_with_sampler(sampler, spec.L, mean, cfg);
}

ScoreCheckpoint train_with_sampler(const PriorSampler& sampler, std::uint32_t L,
                                   const Signal& prior_mean, const TrainConfig& cfg) {
  if (cfg.batch < 1 || cfg.steps < 1 || !(cfg.lr > 0.0) ||
      !(cfg.t_min > 0.0 && cfg.t_min < 1.0))
    throw std::invalid_argument("train: invalid config");
  if (prior_mean.size() != L)
    throw std::invalid_argument("train: prior mean length mismatch");
  Rng rng(derive_seed(cfg.seed, "train"));

  ScoreCheckpoint ckpt;
  ckpt.L = L;
  ckpt.seed = cfg.seed;
  ckpt.steps = cfg.steps;
  ckpt.prior_mean = prior_mean;
  ckpt.net = make_score_net(cfg.channels, cfg.n_layers, cfg.kernel, cfg.schedule_base);
  init_weights(ckpt.net, rng);

  const std::size_t P = ckpt.net.param_count();
  std::vector<double> m(P, 0.0), v(P, 0.0), grad;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::FILE* log = nullptr;
  if (!cfg.log_path.empty()) {
    log = std::fopen(cfg.log_path.c_str(), "w");
    if (log) std::fprintf(log, "step,loss,wall_seconds\n");
  }
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Signal> batch(cfg.batch);
  BatchDraws draws;
  double smoothed = 0.0;
  for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
    for (auto& b : batch) {
      b = sampler(rng);
      for (std::uint32_t j = 0; j < L; ++j) b[j] -= ckpt.prior_mean[j];
    }
    draw_batch(batch, cfg.t_min, cfg.t_rule, ckpt.net.sched, rng, draws);
    const double loss = batch_loss_and_grads(ckpt.net, draws, cfg.batch, L, &grad);
    if (!std::isfinite(loss))
      throw std::runtime_error("train: loss diverged (NaN/inf) at step " +
                               std::to_string(step));
    smoothed = step == 1 ? loss : 0.99 * smoothed + 0.01 * loss;

    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const double progress = static_cast<double>(step - 1) /
                            static_cast<double>(cfg.steps);
    const double lr = cfg.lr * (cfg.lr_floor_frac +
                                (1.0 - cfg.lr_floor_frac) * 0.5 *
                                    (1.0 + std::cos(M_PI * progress)));
    for (std::size_t i = 0; i < P; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      const double update = lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      ckpt.net.params[i] = static_cast<float>(ckpt.net.params[i] - update);
    }

    if (log && (step % cfg.log_every == 0 || step == cfg.steps)) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(log, "%llu,%.17g,%.3f\n",
                   static_cast<unsigned long long>(step), loss, wall);
    }
    if (cfg.verbose && (step % (cfg.log_every * 10) == 0 || step == cfg.steps))
      std::fprintf(stderr, "train step %llu/%llu  loss %.4f (smoothed %.4f)\n",
                   static_cast<unsigned long long>(step),
                   static_cast<unsigned long long>(cfg.steps), loss, smoothed);
  }
  if (log) std::fclose(log);
  ckpt.final_loss = smoothed;
  return ckpt;
}

namespace {

constexpr char kMagic[4] = {'S', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace

void save_checkpoint(const ScoreCheckpoint& ckpt, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  f.write(kMagic, 4);
  write_pod(f, kVersion);
  write_pod(f, ckpt.L);
  write_pod(f, ckpt.net.n_layers);
  write_pod(f, ckpt.net.kernel);
  write_pod(f, ckpt.net.channels);
  write_pod(f, ckpt.net.sched.base);
  write_pod(f, ckpt.seed);
  write_pod(f, ckpt.steps);
  write_pod(f, ckpt.final_loss);
  const std::uint32_t mean_len = static_cast<std::uint32_t>(ckpt.prior_mean.size());
  write_pod(f, mean_len);
  f.write(reinterpret_cast<const char*>(ckpt.prior_mean.data()),
          sizeof(double) * mean_len);
  const std::uint32_t n_tensors = static_cast<std::uint32_t>(ckpt.net.tensors.size());
  write_pod(f, n_tensors);
  for (const auto& t : ckpt.net.tensors) {
    write_pod(f, t.in_c);
    write_pod(f, t.out_c);
    write_pod(f, t.k);
    const std::uint64_t w_off = t.w_off, b_off = t.b_off;
    write_pod(f, w_off);
    write_pod(f, b_off);
  }
  const std::uint64_t n_params = ckpt.net.param_count();
  write_pod(f, n_params);
  f.write(reinterpret_cast<const char*>(ckpt.net.params.data()),
          sizeof(float) * n_params);
  if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

ScoreCheckpoint load_checkpoint(const std::string& path, std::uint32_t expected_L) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic (not a checkpoint file)");
  std::uint32_t version;
  read_pod(f, version);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  ScoreCheckpoint ckpt;
  std::uint32_t n_layers, kernel, channels;
  double base;
  read_pod(f, ckpt.L);
  read_pod(f, n_layers);
  read_pod(f, kernel);
  read_pod(f, channels);
  read_pod(f, base);
  read_pod(f, ckpt.seed);
  read_pod(f, ckpt.steps);
  read_pod(f, ckpt.final_loss);
  if (expected_L != 0 && ckpt.L != expected_L)
    throw std::runtime_error("checkpoint: grid size mismatch (file L=" +
                             std::to_string(ckpt.L) + ", requested L=" +
                             std::to_string(expected_L) + ")");
  std::uint32_t mean_len;
  read_pod(f, mean_len);
  if (mean_len != ckpt.L) throw std::runtime_error("checkpoint: corrupt mean block");
  ckpt.prior_mean.resize(mean_len);
  f.read(reinterpret_cast<char*>(ckpt.prior_mean.data()), sizeof(double) * mean_len);
  if (!f) throw std::runtime_error("checkpoint: truncated file");
  ckpt.net = make_score_net(channels, n_layers, kernel, base);
  std::uint32_t n_tensors;
  read_pod(f, n_tensors);
  if (n_tensors != ckpt.net.tensors.size())
    throw std::runtime_error("checkpoint: layout table mismatch");
  for (const auto& expect : ckpt.net.tensors) {
    std::uint32_t in_c, out_c, k;
    std::uint64_t w_off, b_off;
    read_pod(f, in_c);
    read_pod(f, out_c);
    read_pod(f, k);
    read_pod(f, w_off);
    read_pod(f, b_off);
    if (in_c != expect.in_c || out_c != expect.out_c || k != expect.k ||
        w_off != expect.w_off || b_off != expect.b_off)
      throw std::runtime_error("checkpoint: layout table mismatch");
  }
  std::uint64_t n_params;
  read_pod(f, n_params);
  if (n_params != ckpt.net.param_count())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  f.read(reinterpret_cast<char*>(ckpt.net.params.data()), sizeof(float) * n_params);
  if (!f) throw std::runtime_error("checkpoint: truncated file");
  return ckpt;
}

std::vector<Signal> unconditional_sample(const ScoreCheckpoint& ckpt, std::size_t n,
                                         const diffusion::SamplerSettings& settings,
                                         Rng& rng) {
  if (n < 1) throw std::invalid_argument("unconditional_sample: n must be >= 1");
  diffusion::validate(settings);
  const std::uint64_t base_seed = rng.next_u64();
  std::vector<Signal> out(n);
  const diffusion::ScoreFn score = [&ckpt](const Signal& x, double t) {
    return score_eval(ckpt.net, x, t);
  };
  parallel_chunks(n, worker_count(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Rng chain(derive_seed(base_seed, "chain", i));
      Signal x = diffusion::reverse_diffusion_sample(score, nullptr, ckpt.net.sched,
                                                     ckpt.L, settings, chain);
      for (std::uint32_t j = 0; j < ckpt.L; ++j) x[j] += ckpt.prior_mean[j];
      out[i] = std::move(x);
    }
  });
  return out;
}

}  // namespace mra::score
