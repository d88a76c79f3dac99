#include "mra/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mra::diffusion {

double DiffusionSchedule::sigma2(double t) const {
  return std::pow(base, 2.0 * t);
}

double DiffusionSchedule::perturb_std(double t) const {
  return std::sqrt(perturb_var(t));
}

void validate(const SamplerSettings& s) {
  if (!(s.dt > 0.0 && s.dt < 1.0))
    throw std::invalid_argument("sampler: dt must be in (0, 1)");
  const double steps = 1.0 / s.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw std::invalid_argument("sampler: 1/dt must be integral");
  if (!(s.noise_factor > 0.0))
    throw std::invalid_argument("sampler: noise_factor must be > 0");
}

Signal reverse_diffusion_sample(const ScoreFn& score, const CondFn* cond,
                                const DiffusionSchedule& sched, std::uint32_t L,
                                const SamplerSettings& settings, Rng& rng) {
  validate(settings);
  const long long steps = std::llround(1.0 / settings.dt);
  const double init_std = std::sqrt(sched.sigma2(1.0));
  Signal x(L);
  for (auto& v : x) v = init_std * rng.normal();

  for (long long k = 0; k < steps; ++k) {
    const double t = settings.dt * static_cast<double>(steps - k);
    const double t_next = settings.dt * static_cast<double>(steps - k - 1);
    const double dsig = sched.sigma2(t) - sched.sigma2(t_next);
    Signal drift = score(x, t);
    if (cond) {
      const Signal extra = (*cond)(x, t, rng);
      for (std::uint32_t j = 0; j < L; ++j) drift[j] += extra[j];
    }
    const double coeff = settings.mode == Discretization::EulerMaruyama
                             ? dsig
                             : dsig / settings.dt;
    const double noise_std = std::sqrt(settings.noise_factor * coeff);
    bool finite = true;
    for (std::uint32_t j = 0; j < L; ++j) {
      x[j] += coeff * drift[j] + noise_std * rng.normal();
      finite = finite && std::isfinite(x[j]);
    }
    if (!finite)
      throw std::runtime_error("reverse_diffusion_sample: non-finite state at t=" +
                               std::to_string(t));
  }
  return x;
}

}  // namespace mra::diffusion
