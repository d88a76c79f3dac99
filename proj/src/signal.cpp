#include "mra/signal.hpp"

#include <cmath>
#include <stdexcept>

#include "mra/fft.hpp"

namespace mra {

std::vector<std::uint8_t> make_eta(std::uint32_t L) {
  std::vector<std::uint8_t> eta(L / 2 + 1, 2);
  eta[0] = 1;
  if (L % 2 == 0) eta[L / 2] = 1;
  return eta;
}

namespace signal {

namespace {

void require_length(const Signal& x) {
  if (x.size() < 2) throw std::invalid_argument("signal length must be >= 2");
}

}  // namespace

Signal cyclic_shift(const Signal& x, long long phi) {
  require_length(x);
  const long long L = static_cast<long long>(x.size());
  phi = ((phi % L) + L) % L;
  Signal out(x.size());
  for (long long j = 0; j < L; ++j) out[j] = x[(j - phi + L) % L];
  return out;
}

Spectrum unitary_dft(const Signal& x) {
  require_length(x);
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  Spectrum buf(L);
  for (std::uint32_t j = 0; j < L; ++j) buf[j] = x[j];
  fft::forward_raw(buf.data(), buf.data(), L);
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  for (auto& c : buf) c *= s;
  return buf;
}

Spectrum unitary_dft(const Spectrum& z) {
  const std::uint32_t L = static_cast<std::uint32_t>(z.size());
  Spectrum out(L);
  fft::forward_raw(z.data(), out.data(), L);
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  for (auto& c : out) c *= s;
  return out;
}

Spectrum unitary_idft(const Spectrum& z) {
  const std::uint32_t L = static_cast<std::uint32_t>(z.size());
  Spectrum out(L);
  fft::inverse_raw(z.data(), out.data(), L);
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  for (auto& c : out) c *= s;
  return out;
}

Signal inverse_dft(const Spectrum& s, double sym_tol) {
  const std::size_t L = s.size();
  if (L < 2) throw std::invalid_argument("spectrum length must be >= 2");
  double scale = 0.0;
  for (const auto& c : s) scale = std::max(scale, std::abs(c));
  const double tol = sym_tol * std::max(1.0, scale);
  for (std::size_t l = 0; l < L; ++l) {
    const std::complex<double> mirror = std::conj(s[(L - l) % L]);
    if (std::abs(s[l] - mirror) > tol)
      throw std::invalid_argument(
          "inverse_dft: spectrum is not conjugate-symmetric; real output unavailable");
  }
  Spectrum out = unitary_idft(s);
  Signal x(L);
  for (std::size_t j = 0; j < L; ++j) x[j] = out[j].real();
  return x;
}

PowerSpectrum signal_power_spectrum(const Signal& x) {
  require_length(x);
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  const Spectrum fx = unitary_dft(x);
  PowerSpectrum p;
  p.L = L;
  p.eta = make_eta(L);
  p.comps.resize(L / 2 + 1);
  for (std::uint32_t l = 0; l <= L / 2; ++l) p.comps[l] = std::norm(fx[l]);
  return p;
}

std::vector<double> circular_correlations(const Signal& x, const Signal& y) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  require_length(x);
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  // <S^phi x, y> = sqrt(L) * Re(F^H(conj(Fx) ∘ Fy))[phi]
  Spectrum fx = unitary_dft(x);
  const Spectrum fy = unitary_dft(y);
  for (std::uint32_t l = 0; l < L; ++l) fx[l] = std::conj(fx[l]) * fy[l];
  const Spectrum c = unitary_idft(fx);
  std::vector<double> corr(L);
  const double s = std::sqrt(static_cast<double>(L));
  for (std::uint32_t l = 0; l < L; ++l) corr[l] = s * c[l].real();
  return corr;
}

double aligned_distance(const Signal& x, const Signal& y) {
  const std::vector<double> corr = circular_correlations(x, y);
  double best = corr[0];
  for (double c : corr) best = std::max(best, c);
  const double d2 = norm2sq(x) + norm2sq(y) - 2.0 * best;
  return std::sqrt(std::max(0.0, d2));
}

std::uint32_t best_alignment(const Signal& x, const Signal& y) {
  const std::vector<double> corr = circular_correlations(x, y);
  std::uint32_t best = 0;
  for (std::uint32_t phi = 1; phi < corr.size(); ++phi)
    if (corr[phi] > corr[best]) best = phi;
  return best;
}

Signal power_spectrum_gradient(const Signal& x, std::span<const double> weights) {
  require_length(x);
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  if (weights.size() != L / 2 + 1)
    throw std::invalid_argument("power_spectrum_gradient: weight length mismatch");
  Spectrum fx = unitary_dft(x);
  for (std::uint32_t l = 0; l < L; ++l) {
    const std::uint32_t idx = std::min(l, L - l);
    fx[l] *= weights[idx];
  }
  const Spectrum g = unitary_idft(fx);
  Signal out(L);
  for (std::uint32_t j = 0; j < L; ++j) out[j] = 2.0 * g[j].real();
  return out;
}

double norm2sq(const Signal& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double norm2(const Signal& x) { return std::sqrt(norm2sq(x)); }

}  // namespace signal
}  // namespace mra
