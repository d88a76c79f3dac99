#include "mra/priors.hpp"

#include <cmath>
#include <stdexcept>

namespace mra::priors {

double step_height(std::uint32_t L) {
  const double support = std::ceil(L / 2.0);
  return std::sqrt(static_cast<double>(L) / support);
}

Signal step_template(std::uint32_t L) {
  if (L < 2) throw std::invalid_argument("step_template: L must be >= 2");
  Signal u(L, 0.0);
  const std::uint32_t support = (L + 1) / 2;
  const double h = step_height(L);
  for (std::uint32_t j = 0; j < support; ++j) u[j] = h;
  return u;
}

Signal sample_step_prior(std::uint32_t L, Rng& rng) {
  const Signal u = step_template(L);
  const long long phi = static_cast<long long>(rng.below(L));
  return signal::cyclic_shift(u, phi);
}

namespace detail {

double wrap_centered(double d, double L) {
  return d - L * std::floor(d / L + 0.5);
}

Signal bell_from_bumps(std::uint32_t L, const std::vector<BellBump>& bumps) {
  Signal x(L, 0.0);
  for (const BellBump& b : bumps) {
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * b.tau2);
    for (std::uint32_t l = 0; l < L; ++l) {
      const double d = wrap_centered(static_cast<double>(l) - b.center,
                                     static_cast<double>(L));
      x[l] += b.amplitude * norm * std::exp(-0.5 * d * d / b.tau2);
    }
  }
  return x;
}

}  // namespace detail

Signal sample_bell_prior(const PriorSpec& spec, Rng& rng) {
  if (spec.L < 2) throw std::invalid_argument("sample_bell_prior: L must be >= 2");
  const std::uint64_t K = rng.poisson(spec.poisson_rate);
  std::vector<detail::BellBump> bumps(K + 1);  // sum runs k = 0..K
  for (auto& b : bumps) {
    b.amplitude = spec.amp_lo + (spec.amp_hi - spec.amp_lo) * rng.uniform_co();
    b.tau2 = rng.chi2(spec.tau_dof);
    b.center = static_cast<double>(spec.L) * rng.uniform_co();
  }
  return detail::bell_from_bumps(spec.L, bumps);
}

Signal sample_prior(const PriorSpec& spec, Rng& rng) {
  return spec.kind == PriorKind::Step ? sample_step_prior(spec.L, rng)
                                      : sample_bell_prior(spec, rng);
}

Signal prior_mean(const PriorSpec& spec, std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("prior_mean: n_samples must be >= 1");
  Signal acc(spec.L, 0.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Signal x = sample_prior(spec, rng);
    for (std::uint32_t j = 0; j < spec.L; ++j) acc[j] += x[j];
  }
  for (auto& v : acc) v /= static_cast<double>(n_samples);
  return acc;
}

Signal step_prior_exact_mean(std::uint32_t L) {
  const double support = std::ceil(L / 2.0);
  const double value = step_height(L) * support / static_cast<double>(L);
  return Signal(L, value);
}

TrueSignal make_true_signal(const PriorSpec& spec, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Signal draw = sample_prior(spec, rng);
    const double n2 = signal::norm2sq(draw);
    if (n2 <= 0.0) continue;  // zero-norm draw: resample
    const double scale = std::sqrt(static_cast<double>(spec.L) / n2);
    TrueSignal out{draw, scale};
    for (auto& v : out.x) v *= scale;
    return out;
  }
  throw std::runtime_error("make_true_signal: repeated zero-norm draws");
}

std::string to_string(PriorKind k) {
  return k == PriorKind::Step ? "step" : "bell";
}

}  // namespace mra::priors
