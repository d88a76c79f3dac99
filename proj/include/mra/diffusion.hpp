#pragma once

#include <cstdint>
#include <functional>

#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::diffusion {

// Variance-exploding schedule sigma_t^2 = base^{2t}, t in [0, 1]. The
// perturbation kernel of the forward SDE is N(x0, (sigma_t^2 - sigma_0^2) I),
// so perturb_var(0) = 0 and the reverse integration ends on clean data.
struct DiffusionSchedule {
  double base = 3.0;

  double sigma2(double t) const;
  double perturb_var(double t) const { return sigma2(t) - 1.0; }
  double perturb_std(double t) const;
};

enum class Discretization { EulerMaruyama, LiteralAlg1 };

// EulerMaruyama: x += dsig * s + sqrt(noise_factor * dsig) * xi, with
//   dsig = sigma_t^2 - sigma_{t-dt}^2 (the standard reverse-SDE step at
//   noise_factor 1).
// LiteralAlg1: the printed update with eps = dsig/dt in place of dsig;
//   noise_factor 2 reproduces the printed sqrt(2 eps) coefficient.
struct SamplerSettings {
  double dt = 1e-3;
  Discretization mode = Discretization::EulerMaruyama;
  double noise_factor = 1.0;
};

void validate(const SamplerSettings& s);

// Score of p_t evaluated at a centered state. Must be pure.
using ScoreFn = std::function<Signal(const Signal&, double)>;

// Likelihood-conditioning term; may consume rng state (Monte Carlo statistic
// draws), called once per step before the step noise is drawn.
using CondFn = std::function<Signal(const Signal&, double, Rng&)>;

// Integrates the reverse SDE from t = 1 down to t = dt (state then carries
// t = 0). Throws on non-finite state with the failing step in the message.
Signal reverse_diffusion_sample(const ScoreFn& score, const CondFn* cond,
                                const DiffusionSchedule& sched, std::uint32_t L,
                                const SamplerSettings& settings, Rng& rng);

}  // namespace mra::diffusion
