#pragma once

#include <cstdint>
#include <vector>

#include "mra/diffusion.hpp"
#include "mra/ncchi2.hpp"
#include "mra/score_net.hpp"
#include "mra/signal.hpp"

namespace mra::mps {

struct MpsConfig {
  double dt = 5e-5;  // paper step size; desk profile uses 1e-3
  std::uint32_t J = 1024;
  diffusion::Discretization mode = diffusion::Discretization::EulerMaruyama;
  double noise_factor = 1.0;
  std::uint64_t seed = 0;
  bool condition = true;  // false reproduces unconditional sampling exactly
};

void validate(const MpsConfig& cfg);

// Observation metadata the likelihood needs.
struct ObsContext {
  std::uint64_t N = 1;
  double sigma2 = 0.0;
};

struct PosteriorBatch {
  std::uint32_t L = 0;
  std::uint32_t J = 0;
  std::vector<double> samples;  // J x L, prior mean restored
  std::uint32_t medoid_index = 0;
  std::vector<std::uint32_t> shifts_to_medoid;
  MpsConfig config;
  ObsContext ctx;

  Signal sample_at(std::uint32_t j) const {
    return Signal(samples.begin() + static_cast<std::size_t>(j) * L,
                  samples.begin() + static_cast<std::size_t>(j + 1) * L);
  }
};

// One conditioned reverse-diffusion chain; returns the posterior sample with
// the prior mean restored.
Signal mps_sample(const score::ScoreCheckpoint& ckpt, const PowerSpectrum& phat,
                  const ObsContext& obs, const MpsConfig& cfg, Rng& rng);

// J independent chains with derived per-chain streams; medoid attached.
PosteriorBatch run_posterior_batch(const score::ScoreCheckpoint& ckpt,
                                   const PowerSpectrum& phat, const ObsContext& obs,
                                   const MpsConfig& cfg);

// Index minimizing the summed aligned distance to the batch; ties break low.
std::size_t select_medoid(const std::vector<Signal>& samples);

struct PosteriorSummary {
  Signal mean;
  Signal q05, q50, q95;
  Signal variance;  // aligned componentwise variance (unbiased)
};

// Aligns every sample to the medoid, then reduces componentwise. J >= 2.
PosteriorSummary posterior_summary(const PosteriorBatch& batch);

}  // namespace mra::mps
