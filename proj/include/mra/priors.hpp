#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::priors {

enum class PriorKind { Step, Bell };

struct PriorSpec {
  PriorKind kind = PriorKind::Step;
  std::uint32_t L = 41;
  // Bell hyperparameters.
  double poisson_rate = 10.0;
  double amp_lo = 0.0;
  double amp_hi = 3.0;
  double tau_dof = 10.0;
};

// Height of the canonical step template: h = sqrt(L / ceil(L/2)), so the
// template has ||u||^2 = L.
double step_height(std::uint32_t L);

// Canonical step template: h on [0, ceil(L/2)), 0 elsewhere.
Signal step_template(std::uint32_t L);

// One of the L unit step functions, uniformly at random.
Signal sample_step_prior(std::uint32_t L, Rng& rng);

// Sum of K+1 circularly wrapped Gaussian bumps, K ~ Poisson(rate),
// A_k ~ U[amp_lo, amp_hi], tau_k^2 ~ chi^2_dof, C_k ~ U[0, L).
Signal sample_bell_prior(const PriorSpec& spec, Rng& rng);

Signal sample_prior(const PriorSpec& spec, Rng& rng);

// Empirical mean of n_samples draws (the centering vector for score training).
Signal prior_mean(const PriorSpec& spec, std::size_t n_samples, Rng& rng);

// Exact mean of the step prior: constant h*ceil(L/2)/L.
Signal step_prior_exact_mean(std::uint32_t L);

struct TrueSignal {
  Signal x;      // rescaled so ||x||^2 = L exactly
  double scale;  // factor applied to the raw draw
};

TrueSignal make_true_signal(const PriorSpec& spec, Rng& rng);

std::string to_string(PriorKind k);

namespace detail {

struct BellBump {
  double amplitude;
  double tau2;
  double center;
};

// The bell sum for a fixed bump list; exposed so the K = 0 edge of the
// summation convention (a single bump) is directly testable.
Signal bell_from_bumps(std::uint32_t L, const std::vector<BellBump>& bumps);

// Centered wrap of d into [-L/2, L/2).
double wrap_centered(double d, double L);

}  // namespace detail
}  // namespace mra::priors
