#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace mra {

// A real signal on the cyclic grid Z_L. Plain vector keeps call sites light;
// op preconditions (L >= 2, finite entries) are checked at module boundaries.
using Signal = std::vector<double>;

// Unitary-DFT coefficients, full length L.
using Spectrum = std::vector<std::complex<double>>;

// Non-redundant half power spectrum with multiplicity flags.
// comps[l] = |Fx[l]|^2 for l in [0, floor(L/2)]; eta[l] is 1 at l = 0 and at
// l = L/2 for even L, else 2. The redundant half P[-l] = P[l] is never stored.
struct PowerSpectrum {
  std::vector<double> comps;
  std::vector<std::uint8_t> eta;
  std::uint32_t L = 0;

  std::size_t size() const { return comps.size(); }
};

std::vector<std::uint8_t> make_eta(std::uint32_t L);

namespace signal {

// (S^phi x)[j] = x[(j - phi) mod L]; phi reduced mod L, any sign accepted.
Signal cyclic_shift(const Signal& x, long long phi);

// Unitary DFT: coeffs[k] = L^{-1/2} sum_j x[j] exp(-2πi jk/L).
Spectrum unitary_dft(const Signal& x);

// Complex-to-complex unitary transforms used by internal consumers.
Spectrum unitary_dft(const Spectrum& z);
Spectrum unitary_idft(const Spectrum& z);

// Inverse transform with a real result. Throws if the input is not
// conjugate-symmetric within sym_tol (relative to the largest coefficient).
Signal inverse_dft(const Spectrum& s, double sym_tol = 1e-9);

PowerSpectrum signal_power_spectrum(const Signal& x);

// min over shifts of ||S^phi x - y||_2, via FFT cross-correlation.
double aligned_distance(const Signal& x, const Signal& y);

// The phi achieving aligned_distance(x, y); ties break to the smallest phi.
std::uint32_t best_alignment(const Signal& x, const Signal& y);

// Gradient of sum_{l in [L]} m[l] |Fx[l]|^2 where m is `weights` mirrored
// with conjugate symmetry, i.e. 2 Re(F^H (m ∘ Fx)). weights has floor(L/2)+1
// entries.
Signal power_spectrum_gradient(const Signal& x, std::span<const double> weights);

// All L circular correlations c[phi] = <S^phi x, y> in one pass.
std::vector<double> circular_correlations(const Signal& x, const Signal& y);

double norm2(const Signal& x);    // ||x||_2
double norm2sq(const Signal& x);  // ||x||_2^2

}  // namespace signal
}  // namespace mra
