#pragma once

#include <cstdint>
#include <vector>

#include "mra/forward.hpp"
#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::baselines {

struct EmConfig {
  std::uint64_t max_iters = 10000;
  double tol = 1e-5;  // relative-change stopping tolerance
  enum class Init { RandomGaussian, FirstObservation } init = Init::RandomGaussian;
  std::uint64_t seed = 0;
  // Per-observation spectra are cached when N*L*16 bytes fit this budget.
  std::size_t cache_budget_bytes = 3ull << 30;
};

struct EmResult {
  Signal estimate;
  std::vector<double> loglik;  // marginal log-likelihood per iteration
  std::uint64_t iters = 0;
  bool converged = false;
};

// Expectation-maximization with marginalized shifts. sigma2 is taken from the
// dataset; sigma2 = 0 switches to the noiseless align-and-average path.
EmResult em_estimate(const forward::MraDataset& d, const EmConfig& cfg);

struct IpsConfig {
  std::uint32_t max_iters = 100;
  double tol = 1e-8;  // max per-component phase change
  std::uint64_t seed = 0;
};

struct IpsResult {
  Signal estimate;
  std::uint32_t iters = 0;
  bool converged = false;
  std::vector<double> residual;  // weighted phase-constraint residual per iter
};

// Iterative phase synchronization from (sample mean, power spectrum,
// bispectrum); the statistics are debiased internally with sigma2.
IpsResult ips_estimate(const forward::SampleStats& stats, double sigma2,
                       const IpsConfig& cfg);

}  // namespace mra::baselines
