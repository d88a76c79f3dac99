#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::forward {

// N noisy shifted observations, row-major N x L.
struct MraDataset {
  std::vector<double> obs;
  std::uint32_t L = 0;
  std::uint64_t N = 0;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> true_shifts;  // empty when unknown

  const double* row(std::uint64_t n) const { return obs.data() + n * L; }
  double* row(std::uint64_t n) { return obs.data() + n * L; }
};

// L x L complex matrix, mat[k1*L + k2] estimating x^[k1] x^[k2] conj(x^[k1+k2]).
struct BispectrumMat {
  std::uint32_t L = 0;
  std::vector<std::complex<double>> mat;

  std::complex<double>& at(std::uint32_t k1, std::uint32_t k2) {
    return mat[static_cast<std::size_t>(k1) * L + k2];
  }
  const std::complex<double>& at(std::uint32_t k1, std::uint32_t k2) const {
    return mat[static_cast<std::size_t>(k1) * L + k2];
  }
};

struct SampleStats {
  std::uint32_t L = 0;
  std::uint64_t N = 0;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  PowerSpectrum pspec;
  std::optional<BispectrumMat> bispec;
};

// Fills row j = x[(j - phi) mod L] + sigma*g. The per-row generator stream is
// derived from (seed, n), so chunked replay reproduces the materialized
// dataset bit-exactly.
void fill_observation(const Signal& x, double sigma2, std::uint64_t seed,
                      std::uint64_t n, double* row, std::uint32_t* shift_out);

MraDataset generate_observations(const Signal& x, std::uint64_t N, double sigma2,
                                 std::uint64_t seed);

double sample_mean(const MraDataset& d);
PowerSpectrum sample_power_spectrum(const MraDataset& d);
BispectrumMat sample_bispectrum(const MraDataset& d);

// One streaming pass over generated observations; never materializes the
// dataset. Partial sums are combined in fixed chunk order.
SampleStats stream_stats(const Signal& x, std::uint64_t N, double sigma2,
                         std::uint64_t seed, bool with_bispectrum);

// Same reductions over an in-memory dataset.
SampleStats compute_stats(const MraDataset& d, bool with_bispectrum);

// Componentwise max(comps - sigma2, 0).
PowerSpectrum debias_power_spectrum(const PowerSpectrum& p, double sigma2);

// Removes sigma^2 * x^[0] from the three biased lines k1=0, k2=0, k1+k2=0,
// with x^[0] = sqrt(L) * mean_est.
BispectrumMat debias_bispectrum(const BispectrumMat& b, double sigma2,
                                double mean_est);

// Population statistics of a clean signal (oracles and IPS tests).
BispectrumMat population_bispectrum(const Signal& x);

}  // namespace mra::forward
