#include "mra/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "mra/rng.hpp"

using namespace mra;
using signal::aligned_distance;
using signal::best_alignment;
using signal::cyclic_shift;
using signal::inverse_dft;
using signal::power_spectrum_gradient;
using signal::signal_power_spectrum;
using signal::unitary_dft;

namespace {

Signal random_signal(std::size_t L, Rng& rng) {
  Signal x(L);
  for (auto& v : x) v = rng.normal();
  return x;
}

// O(L^2) reference transform, independent of the FFT path.
Spectrum brute_dft(const Signal& x) {
  const std::size_t L = x.size();
  Spectrum out(L);
  for (std::size_t k = 0; k < L; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < L; ++j) {
      const double ang = -2.0 * M_PI * static_cast<double>(j * k) / L;
      acc += x[j] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc / std::sqrt(static_cast<double>(L));
  }
  return out;
}

double brute_aligned_distance(const Signal& x, const Signal& y) {
  double best = HUGE_VAL;
  for (std::size_t phi = 0; phi < x.size(); ++phi) {
    const Signal s = cyclic_shift(x, static_cast<long long>(phi));
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d2 += (s[j] - y[j]) * (s[j] - y[j]);
    best = std::min(best, std::sqrt(d2));
  }
  return best;
}

}  // namespace

TEST(CyclicShift, SpecExamples) {
  const Signal x{1, 2, 3, 4};
  EXPECT_EQ(cyclic_shift(x, 0), x);
  EXPECT_EQ(cyclic_shift(x, 4), x);
  EXPECT_EQ(cyclic_shift(x, 1), (Signal{4, 1, 2, 3}));
}

TEST(CyclicShift, FullCycleIsIdentity) {
  Rng rng(7);
  const Signal x = random_signal(9, rng);
  Signal y = x;
  for (int i = 0; i < 9; ++i) y = cyclic_shift(y, 1);
  for (std::size_t j = 0; j < x.size(); ++j) EXPECT_DOUBLE_EQ(y[j], x[j]);
}

TEST(UnitaryDft, ConstantSignal) {
  const Spectrum s = unitary_dft(Signal{1, 1, 1, 1});
  EXPECT_NEAR(s[0].real(), 2.0, 1e-14);
  EXPECT_NEAR(s[0].imag(), 0.0, 1e-14);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(s[k]), 0.0, 1e-14);
}

TEST(UnitaryDft, DeltaHasFlatSpectrum) {
  const Spectrum s = unitary_dft(Signal{1, 0, 0, 0});
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(s[k]), 0.5, 1e-14);
}

TEST(UnitaryDft, MatchesBruteForce) {
  Rng rng(11);
  const Signal x = random_signal(8, rng);
  const Spectrum fast = unitary_dft(x);
  const Spectrum slow = brute_dft(x);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(fast[k] - slow[k]), 0.0, 1e-12);
}

TEST(UnitaryDft, ParsevalAndIsometry) {
  Rng rng(12);
  for (std::size_t L : {5, 8, 16}) {
    const Signal x = random_signal(L, rng);
    const Spectrum s = unitary_dft(x);
    double fn = 0.0;
    for (const auto& c : s) fn += std::norm(c);
    EXPECT_NEAR(fn, signal::norm2sq(x), 1e-12 * std::max(1.0, fn));
  }
}

TEST(UnitaryDft, ShiftIdentity) {
  // F(Sx)[l] = exp(-2πi l / L) Fx[l]
  Rng rng(13);
  const std::size_t L = 7;
  const Signal x = random_signal(L, rng);
  const Spectrum fx = unitary_dft(x);
  const Spectrum fsx = unitary_dft(cyclic_shift(x, 1));
  for (std::size_t l = 0; l < L; ++l) {
    const double ang = -2.0 * M_PI * static_cast<double>(l) / L;
    const std::complex<double> expect =
        std::complex<double>{std::cos(ang), std::sin(ang)} * fx[l];
    EXPECT_NEAR(std::abs(fsx[l] - expect), 0.0, 1e-12);
  }
}

TEST(InverseDft, RoundTrip) {
  Rng rng(14);
  const Signal x = random_signal(12, rng);
  const Signal back = inverse_dft(unitary_dft(x));
  for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(back[j], x[j], 1e-12);
}

TEST(InverseDft, ConstantCase) {
  const Signal x = inverse_dft(Spectrum{{2, 0}, {0, 0}, {0, 0}, {0, 0}});
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(InverseDft, RejectsAsymmetricSpectrum) {
  Spectrum s{{1, 0}, {0, 1}, {0, 0}, {0, 0}};  // s[1] != conj(s[3])
  EXPECT_THROW(inverse_dft(s), std::invalid_argument);
}

TEST(PowerSpectrum, ConstantSignal) {
  const PowerSpectrum p = signal_power_spectrum(Signal{1, 1, 1, 1});
  ASSERT_EQ(p.comps.size(), 3u);
  EXPECT_NEAR(p.comps[0], 4.0, 1e-13);
  EXPECT_NEAR(p.comps[1], 0.0, 1e-13);
  EXPECT_NEAR(p.comps[2], 0.0, 1e-13);
  EXPECT_EQ(p.eta[0], 1);
  EXPECT_EQ(p.eta[1], 2);
  EXPECT_EQ(p.eta[2], 1);
}

TEST(PowerSpectrum, ShiftInvariance) {
  Rng rng(15);
  const Signal x = random_signal(10, rng);
  const PowerSpectrum p = signal_power_spectrum(x);
  for (long long phi = 0; phi < 10; ++phi) {
    const PowerSpectrum q = signal_power_spectrum(cyclic_shift(x, phi));
    for (std::size_t l = 0; l < p.comps.size(); ++l)
      EXPECT_NEAR(q.comps[l], p.comps[l], 1e-12 * std::max(1.0, p.comps[l]));
  }
}

TEST(PowerSpectrum, ParsevalWithMultiplicity) {
  Rng rng(16);
  const Signal x = random_signal(7, rng);
  const PowerSpectrum p = signal_power_spectrum(x);
  EXPECT_EQ(p.eta, make_eta(7));
  double total = 0.0;
  for (std::size_t l = 0; l < p.comps.size(); ++l)
    total += static_cast<double>(p.eta[l]) * p.comps[l];
  EXPECT_NEAR(total, signal::norm2sq(x), 1e-12 * signal::norm2sq(x));
}

TEST(PowerSpectrum, EtaEvenGrid) {
  const auto eta = make_eta(8);
  ASSERT_EQ(eta.size(), 5u);
  EXPECT_EQ(eta[0], 1);
  EXPECT_EQ(eta[4], 1);
  for (int l = 1; l < 4; ++l) EXPECT_EQ(eta[l], 2);
}

TEST(AlignedDistance, SameOrbitIsZero) {
  EXPECT_NEAR(aligned_distance(Signal{1, 0, 0}, Signal{0, 1, 0}), 0.0, 1e-12);
  Rng rng(17);
  const Signal x = random_signal(6, rng);
  EXPECT_NEAR(aligned_distance(x, x), 0.0, 1e-12);
}

TEST(AlignedDistance, MatchesBruteForce) {
  Rng rng(18);
  for (int rep = 0; rep < 20; ++rep) {
    const Signal x = random_signal(11, rng);
    const Signal y = random_signal(11, rng);
    EXPECT_NEAR(aligned_distance(x, y), brute_aligned_distance(x, y), 1e-10);
  }
}

TEST(AlignedDistance, PseudometricProperties) {
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const Signal a = random_signal(9, rng);
    const Signal b = random_signal(9, rng);
    const Signal c = random_signal(9, rng);
    const double ab = aligned_distance(a, b);
    const double ba = aligned_distance(b, a);
    const double ac = aligned_distance(a, c);
    const double cb = aligned_distance(c, b);
    EXPECT_NEAR(ab, ba, 1e-10);
    EXPECT_LE(ab, ac + cb + 1e-10);
  }
}

TEST(AlignedDistance, LengthMismatchThrows) {
  EXPECT_THROW(aligned_distance(Signal{1, 2, 3}, Signal{1, 2}), std::invalid_argument);
}

TEST(BestAlignment, SpecExamples) {
  EXPECT_EQ(best_alignment(Signal{1, 0, 0}, Signal{0, 1, 0}), 1u);
  Rng rng(20);
  const Signal x = random_signal(5, rng);
  EXPECT_EQ(best_alignment(x, x), 0u);
}

TEST(BestAlignment, RecoversKnownShift) {
  Rng rng(21);
  const Signal x = random_signal(12, rng);
  const Signal y = cyclic_shift(x, 5);
  // shift(x, phi) == y requires phi = 5
  EXPECT_EQ(best_alignment(x, y), 5u);
  EXPECT_NEAR(aligned_distance(cyclic_shift(x, best_alignment(x, y)), y), 0.0, 1e-12);
}

TEST(ShiftDftCommutation, MagnitudesInvariant) {
  Rng rng(22);
  const std::size_t L = 13;
  const Signal x = random_signal(L, rng);
  const Spectrum fx = unitary_dft(x);
  for (long long phi = 0; phi < static_cast<long long>(L); ++phi) {
    const Spectrum fs = unitary_dft(cyclic_shift(x, phi));
    for (std::size_t l = 0; l < L; ++l)
      EXPECT_NEAR(std::abs(fs[l]), std::abs(fx[l]), 1e-12);
  }
}

TEST(PowerSpectrumGradient, ZeroWeights) {
  Rng rng(23);
  const Signal x = random_signal(8, rng);
  const std::vector<double> w(5, 0.0);
  const Signal g = power_spectrum_gradient(x, w);
  for (double v : g) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(PowerSpectrumGradient, UnitWeightsGiveTwoX) {
  Rng rng(24);
  for (std::size_t L : {6, 9}) {
    const Signal x = random_signal(L, rng);
    const std::vector<double> w(L / 2 + 1, 1.0);
    const Signal g = power_spectrum_gradient(x, w);
    for (std::size_t j = 0; j < L; ++j) EXPECT_NEAR(g[j], 2.0 * x[j], 1e-12);
  }
}

TEST(PowerSpectrumGradient, MatchesFiniteDifferences) {
  Rng rng(25);
  int checked = 0;
  for (std::size_t L : {5, 9, 16}) {
    for (int rep = 0; rep < 34; ++rep) {
      const Signal x = random_signal(L, rng);
      std::vector<double> w(L / 2 + 1);
      for (auto& v : w) v = rng.normal();
      // Objective: sum over the full spectrum of mirrored weights.
      auto objective = [&](const Signal& s) {
        const Spectrum fs = unitary_dft(s);
        double total = 0.0;
        for (std::size_t l = 0; l < L; ++l)
          total += w[std::min(l, L - l)] * std::norm(fs[l]);
        return total;
      };
      const Signal g = power_spectrum_gradient(x, w);
      const double h = 1e-6;
      for (std::size_t j = 0; j < L; ++j) {
        Signal xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (objective(xp) - objective(xm)) / (2.0 * h);
        const double scale = std::max(1.0, std::abs(fd));
        EXPECT_NEAR(g[j], fd, 1e-6 * scale);
      }
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(PowerSpectrumGradient, WeightLengthMismatchThrows) {
  Rng rng(26);
  const Signal x = random_signal(8, rng);
  const std::vector<double> w(3, 1.0);
  EXPECT_THROW(power_spectrum_gradient(x, w), std::invalid_argument);
}
