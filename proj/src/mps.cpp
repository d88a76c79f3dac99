#include "mra/mps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mra/parallel.hpp"

namespace mra::mps {

void validate(const MpsConfig& cfg) {
  diffusion::SamplerSettings s{cfg.dt, cfg.mode, cfg.noise_factor};
  diffusion::validate(s);
  if (cfg.J < 1) throw std::invalid_argument("mps: J must be >= 1");
}

Signal mps_sample(const score::ScoreCheckpoint& ckpt, const PowerSpectrum& phat,
                  const ObsContext& obs, const MpsConfig& cfg, Rng& rng) {
  validate(cfg);
  if (phat.L != ckpt.L)
    throw std::invalid_argument("mps_sample: power spectrum / checkpoint size mismatch");
  if (obs.sigma2 < 0.0) throw std::invalid_argument("mps_sample: sigma2 < 0");

  const diffusion::ScoreFn score = [&ckpt](const Signal& x, double t) {
    return score::score_eval(ckpt.net, x, t);
  };
  const diffusion::DiffusionSchedule& sched = ckpt.net.sched;
  const diffusion::CondFn cond = [&](const Signal& x_centered, double t,
                                     Rng& chain_rng) -> Signal {
    const double var_t = sched.perturb_var(t);
    // One Monte Carlo draw of P^_t | P^ per step.
    const auto params = ncchi2::build_pt_given_phat(phat, obs.sigma2, var_t, obs.N);
    PowerSpectrum phat_t = phat;
    for (std::size_t l = 0; l < params.size(); ++l)
      phat_t.comps[l] = ncchi2::sample(params[l], chain_rng);
    // The spectral likelihood is evaluated in uncentered coordinates; the
    // constant offset does not change the gradient applied to the state.
    Signal x_unc = x_centered;
    for (std::uint32_t j = 0; j < ckpt.L; ++j) x_unc[j] += ckpt.prior_mean[j];
    const auto ctx = ncchi2::build_pt_given_xt(obs.sigma2, var_t, obs.N, ckpt.L);
    return ncchi2::conditional_score(phat_t, x_unc, ctx);
  };

  const diffusion::SamplerSettings settings{cfg.dt, cfg.mode, cfg.noise_factor};
  Signal x = diffusion::reverse_diffusion_sample(
      score, cfg.condition ? &cond : nullptr, sched, ckpt.L, settings, rng);
  for (std::uint32_t j = 0; j < ckpt.L; ++j) x[j] += ckpt.prior_mean[j];
  return x;
}

PosteriorBatch run_posterior_batch(const score::ScoreCheckpoint& ckpt,
                                   const PowerSpectrum& phat, const ObsContext& obs,
                                   const MpsConfig& cfg) {
  validate(cfg);
  PosteriorBatch batch;
  batch.L = ckpt.L;
  batch.J = cfg.J;
  batch.config = cfg;
  batch.ctx = obs;
  batch.samples.assign(static_cast<std::size_t>(cfg.J) * ckpt.L, 0.0);
  parallel_chunks(cfg.J, worker_count(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      Rng chain(derive_seed(cfg.seed, "chain", j));
      const Signal x = mps_sample(ckpt, phat, obs, cfg, chain);
      std::copy(x.begin(), x.end(), batch.samples.begin() + j * ckpt.L);
    }
  });
  std::vector<Signal> rows(cfg.J);
  for (std::uint32_t j = 0; j < cfg.J; ++j) rows[j] = batch.sample_at(j);
  batch.medoid_index = static_cast<std::uint32_t>(select_medoid(rows));
  const Signal medoid = rows[batch.medoid_index];
  batch.shifts_to_medoid.resize(cfg.J);
  for (std::uint32_t j = 0; j < cfg.J; ++j)
    batch.shifts_to_medoid[j] = signal::best_alignment(rows[j], medoid);
  return batch;
}

std::size_t select_medoid(const std::vector<Signal>& samples) {
  if (samples.empty()) throw std::invalid_argument("select_medoid: empty batch");
  const std::size_t J = samples.size();
  std::vector<double> total(J, 0.0);
  for (std::size_t a = 0; a < J; ++a) {
    for (std::size_t b = a + 1; b < J; ++b) {
      const double d = signal::aligned_distance(samples[a], samples[b]);
      total[a] += d;
      total[b] += d;
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < J; ++j)
    if (total[j] < total[best]) best = j;
  return best;
}

PosteriorSummary posterior_summary(const PosteriorBatch& batch) {
  if (batch.J < 2) throw std::invalid_argument("posterior_summary: needs J >= 2");
  const std::uint32_t L = batch.L;
  const Signal medoid = batch.sample_at(batch.medoid_index);
  std::vector<Signal> aligned(batch.J);
  for (std::uint32_t j = 0; j < batch.J; ++j) {
    const Signal s = batch.sample_at(j);
    aligned[j] = signal::cyclic_shift(s, signal::best_alignment(s, medoid));
  }
  PosteriorSummary out;
  out.mean.assign(L, 0.0);
  out.q05.assign(L, 0.0);
  out.q50.assign(L, 0.0);
  out.q95.assign(L, 0.0);
  out.variance.assign(L, 0.0);
  std::vector<double> col(batch.J);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(batch.J - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min<std::size_t>(lo + 1, batch.J - 1);
    const double frac = pos - static_cast<double>(lo);
    return col[lo] + frac * (col[hi] - col[lo]);
  };
  for (std::uint32_t c = 0; c < L; ++c) {
    double s = 0.0, s2 = 0.0;
    for (std::uint32_t j = 0; j < batch.J; ++j) {
      col[j] = aligned[j][c];
      s += col[j];
    }
    const double m = s / batch.J;
    for (std::uint32_t j = 0; j < batch.J; ++j) {
      const double d = col[j] - m;
      s2 += d * d;
    }
    std::sort(col.begin(), col.end());
    out.mean[c] = m;
    out.variance[c] = s2 / static_cast<double>(batch.J - 1);
    out.q05[c] = quantile(0.05);
    out.q50[c] = quantile(0.50);
    out.q95[c] = quantile(0.95);
  }
  return out;
}

}  // namespace mra::mps
