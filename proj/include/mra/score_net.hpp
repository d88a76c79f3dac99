#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mra/diffusion.hpp"
#include "mra/priors.hpp"
#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::score {

// Shift-equivariant score network: a stack of circular 1-D convolutions with
// ReLU in between and a final pointwise projection. Inputs are two channels,
// the centered signal and a constant noise-conditioning channel ln sigma_t^2.
// Weights are stored as a flat f32 vector with a layout table, matching the
// checkpoint format.
struct ScoreNet {
  struct TensorDesc {
    std::uint32_t in_c, out_c, k;
    std::size_t w_off, b_off;
  };

  std::uint32_t channels = 4;
  std::uint32_t n_layers = 8;
  std::uint32_t kernel = 9;
  diffusion::DiffusionSchedule sched;
  std::vector<TensorDesc> tensors;  // n_layers convs + 1x1 projection
  std::vector<float> params;

  std::size_t param_count() const { return params.size(); }
};

ScoreNet make_score_net(std::uint32_t channels, std::uint32_t n_layers,
                        std::uint32_t kernel, double schedule_base);
void init_weights(ScoreNet& net, Rng& rng);

// Per-thread forward/backward scratch.
struct NetWorkspace {
  std::uint32_t L = 0;
  std::vector<std::vector<double>> acts;  // input to each layer
  std::vector<std::vector<double>> pre;   // pre-activation output of each layer
  std::vector<std::vector<double>> dact;  // gradient scratch
};

void workspace_init(NetWorkspace& ws, const ScoreNet& net, std::uint32_t L);

// Raw network output (before the 1/sigma~_t scaling); length L.
const std::vector<double>& net_forward(const ScoreNet& net, const double* x,
                                       double cond_value, NetWorkspace& ws);

// Accumulates d(loss)/d(params) into grad (flat, double), given d(loss)/d(raw).
void net_backward(const ScoreNet& net, NetWorkspace& ws, const double* d_raw,
                  double* grad);

// Score estimate at a centered point, t in (0, 1].
Signal score_eval(const ScoreNet& net, const Signal& x_centered, double t);

// Denoising score-matching objective over a batch of centered prior samples:
// mean over the batch of || raw(x + s~_t g, t) + g ||^2, t ~ U[t_min, 1].
double dsm_loss(const ScoreNet& net, const std::vector<Signal>& centered_batch,
                double t_min, Rng& rng);

// Same objective, also filling d(loss)/d(params). Batch randomness is drawn
// serially from rng, so copies of the same generator give identical draws.
double dsm_loss_and_grad(const ScoreNet& net,
                         const std::vector<Signal>& centered_batch, double t_min,
                         Rng& rng, std::vector<double>& grad);

// How diffusion times are drawn during training. UniformT is the plain rule;
// LogUniformVar spreads draws evenly over the octaves of perturbation
// variance, which concentrates effort on the small-noise end.
enum class TSampling { UniformT, LogUniformVar };

struct TrainConfig {
  std::uint32_t batch = 128;
  std::uint64_t steps = 200000;
  double lr = 1e-3;
  double lr_floor_frac = 0.05;  // cosine decay from lr down to lr * frac
  std::uint64_t seed = 1;
  double t_min = 1e-3;
  TSampling t_rule = TSampling::UniformT;
  std::uint32_t kernel = 9;
  std::uint32_t channels = 4;
  std::uint32_t n_layers = 8;
  double schedule_base = 3.0;
  std::size_t mean_samples = 50000;
  std::string log_path;         // training-log CSV (step, loss, wall seconds)
  std::uint32_t log_every = 200;
  bool verbose = false;
};

struct ScoreCheckpoint {
  std::uint32_t L = 0;
  ScoreNet net;
  Signal prior_mean;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  double final_loss = 0.0;
};

// Trains against the prior with Adam; deterministic given cfg.seed (batch
// randomness is drawn serially, gradients reduce in sample order).
ScoreCheckpoint train(const priors::PriorSpec& spec, const TrainConfig& cfg);

// Same training loop against an arbitrary sampler with a caller-supplied
// centering vector (toy priors in tests).
using PriorSampler = std::function<Signal(Rng&)>;
ScoreCheckpoint train_with_sampler(const PriorSampler& sampler, std::uint32_t L,
                                   const Signal& prior_mean, const TrainConfig& cfg);

void save_checkpoint(const ScoreCheckpoint& ckpt, const std::string& path);
// expected_L = 0 accepts any grid size.
ScoreCheckpoint load_checkpoint(const std::string& path, std::uint32_t expected_L = 0);

// Reverse-diffusion sampling with the conditioning term absent; adds the
// stored prior mean back to each output.
std::vector<Signal> unconditional_sample(const ScoreCheckpoint& ckpt, std::size_t n,
                                         const diffusion::SamplerSettings& settings,
                                         Rng& rng);

}  // namespace mra::score
