#include "mra/ncchi2.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "mra/forward.hpp"
#include "mra/rng.hpp"
#include "mra/signal.hpp"

using namespace mra;
using ncchi2::build_pt_given_phat;
using ncchi2::build_pt_given_xt;
using ncchi2::conditional_score;
using ncchi2::dlogpdf_dlambda;
using ncchi2::log_pdf;
using ncchi2::NcChi2Params;
using ncchi2::power_spectrum_log_likelihood;

namespace {

// Simpson quadrature of exp(log_pdf) over (0, zmax) with the substitution
// z = u^4, which kills the endpoint singularity for every alpha >= 1.
double integrate_density(const NcChi2Params& p, int n = 20000) {
  const double wmax = p.order + p.noncentrality +
                      40.0 * std::sqrt(2.0 * p.order + 4.0 * p.noncentrality) + 60.0;
  const double umax = std::pow(wmax * p.scale, 0.25);
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double z = u * u * u * u;
    return std::exp(log_pdf(p, z)) * 4.0 * u * u * u;
  };
  const double h = umax / n;
  double acc = g(umax);
  for (int i = 1; i < n; ++i) acc += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

Signal random_signal(std::size_t L, Rng& rng) {
  Signal x(L);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST(LogPdf, CentralChi2ClosedForms) {
  // chi^2_1 at z=1: (2 pi)^{-1/2} e^{-1/2}
  EXPECT_NEAR(log_pdf({1.0, 0.0, 1.0}, 1.0), -0.5 * std::log(2.0 * M_PI) - 0.5, 1e-10);
  // chi^2_2 is Exponential(1/2): log(0.5 e^{-1}) at z=2
  EXPECT_NEAR(log_pdf({2.0, 0.0, 1.0}, 2.0), std::log(0.5) - 1.0, 1e-10);
}

TEST(LogPdf, ScalingShiftsLogDensity) {
  // Z = c W: f_Z(z) = f_W(z/c)/c
  const double base = log_pdf({3.0, 2.0, 1.0}, 4.0);
  EXPECT_NEAR(log_pdf({3.0, 2.0, 2.0}, 8.0), base - std::log(2.0), 1e-12);
}

TEST(LogPdf, QuadratureNormalization) {
  for (double alpha : {1.0, 2.0, 5.0, 10.0}) {
    for (double lambda : {0.0, 1.0, 10.0}) {
      for (double c : {0.5, 1.0, 3.0}) {
        const double mass = integrate_density({alpha, lambda, c});
        EXPECT_NEAR(mass, 1.0, 1e-6) << "alpha=" << alpha << " lambda=" << lambda
                                     << " c=" << c;
      }
    }
  }
}

TEST(LogPdf, InvalidInputsThrow) {
  EXPECT_THROW(log_pdf({2.0, 0.0, 1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(log_pdf({2.0, 0.0, 1.0}, -1.0), std::invalid_argument);
  EXPECT_THROW(log_pdf({0.0, 0.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(log_pdf({2.0, -1.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(log_pdf({2.0, 0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST(DlogpdfDlambda, CentralLimitExamples) {
  EXPECT_NEAR(dlogpdf_dlambda({2.0, 0.0, 1.0}, 2.0), 0.0, 1e-12);
  EXPECT_NEAR(dlogpdf_dlambda({2.0, 0.0, 1.0}, 4.0), 0.5, 1e-12);
}

TEST(DlogpdfDlambda, MatchesFiniteDifferences) {
  Rng rng(501);
  for (int rep = 0; rep < 100; ++rep) {
    const double alpha = 0.5 + 49.5 * rng.uniform_co();
    const double lambda = 0.2 + 19.8 * rng.uniform_co();
    const double c = 0.25 + 2.0 * rng.uniform_co();
    const NcChi2Params p{alpha, lambda, c};
    const double z = ncchi2::mean(p) * (0.3 + 1.5 * rng.uniform_co());
    const double h = 1e-5 * std::max(1.0, lambda);
    const double fd = (log_pdf({alpha, lambda + h, c}, z) -
                       log_pdf({alpha, lambda - h, c}, z)) /
                      (2.0 * h);
    const double an = dlogpdf_dlambda(p, z);
    EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd)))
        << "alpha=" << alpha << " lambda=" << lambda << " c=" << c << " z=" << z;
  }
}

TEST(DlogpdfDlambda, LargeOrderMatchesFiniteDifferences) {
  Rng rng(502);
  for (int rep = 0; rep < 30; ++rep) {
    const double alpha = 2000.0 + 50000.0 * rng.uniform_co();
    const double lambda = alpha * 3.0 * rng.uniform_co();
    const NcChi2Params p{alpha, lambda, 0.01};
    const double z = ncchi2::mean(p) + std::sqrt(ncchi2::variance(p)) *
                                           (2.0 * rng.uniform_co() - 1.0);
    const double h = 1e-5 * std::max(1.0, lambda);
    const double fd = (log_pdf({alpha, lambda + h, 0.01}, z) -
                       log_pdf({alpha, lambda - h, 0.01}, z)) /
                      (2.0 * h);
    EXPECT_NEAR(dlogpdf_dlambda(p, z), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(RegimeContinuity, LogPdfBandAtSwitch) {
  // Exact vs large-order path around alpha = 10^3, z over +-3 std.
  for (double alpha : {600.0, 1000.0, 1500.0}) {
    for (double lambda : {0.0, 0.3 * alpha, 2.0 * alpha}) {
      for (double c : {1.0, 0.01}) {
        const NcChi2Params p{alpha, lambda, c};
        const double m = ncchi2::mean(p);
        const double s = std::sqrt(ncchi2::variance(p));
        for (double k = -3.0; k <= 3.01; k += 0.5) {
          const double z = m + k * s;
          if (z <= 0.0) continue;
          const double le = ncchi2::detail::log_pdf_exact(p, z);
          const double lg = ncchi2::detail::log_pdf_large_order(p, z);
          EXPECT_LT(std::abs(lg - le) / std::max(1.0, std::abs(le)), 1e-3)
              << "alpha=" << alpha << " lambda=" << lambda << " k=" << k;
        }
      }
    }
  }
}

TEST(Sampling, CentralChi2Moments) {
  Rng rng(503);
  const NcChi2Params p{2.0, 0.0, 1.0};
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ncchi2::sample(p, rng);
    ASSERT_GE(x, 0.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // Central moments of chi'^2: mu2 = 2(a+2l), mu4 = 12(a+2l)^2 + 48(a+4l).
  const double mu2 = 2.0 * (p.order + 2.0 * p.noncentrality);
  const double mu4 = 12.0 * (p.order + 2.0 * p.noncentrality) *
                         (p.order + 2.0 * p.noncentrality) +
                     48.0 * (p.order + 4.0 * p.noncentrality);
  EXPECT_NEAR(mean, 2.0, 3.0 * std::sqrt(mu2 / n));
  EXPECT_NEAR(var, 4.0, 3.0 * std::sqrt((mu4 - mu2 * mu2) / n));
}

TEST(Sampling, NoncentralScaledMoments) {
  Rng rng(504);
  const NcChi2Params p{4.0, 5.0, 0.5};
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ncchi2::sample(p, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  const double c2 = p.scale * p.scale;
  const double mu2 = c2 * 2.0 * (p.order + 2.0 * p.noncentrality);
  const double mu4 = c2 * c2 *
                     (12.0 * (p.order + 2.0 * p.noncentrality) *
                          (p.order + 2.0 * p.noncentrality) +
                      48.0 * (p.order + 4.0 * p.noncentrality));
  EXPECT_NEAR(mean, 4.5, 3.0 * std::sqrt(mu2 / n));
  EXPECT_NEAR(var, 7.0, 3.0 * std::sqrt((mu4 - mu2 * mu2) / n));
}

TEST(Sampling, FractionalOrderMoments) {
  Rng rng(505);
  const NcChi2Params p{0.5, 3.0, 1.0};
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ncchi2::sample(p, rng);
    ASSERT_GE(x, 0.0);
    s += x;
  }
  const double mu2 = 2.0 * (p.order + 2.0 * p.noncentrality);
  EXPECT_NEAR(s / n, ncchi2::mean(p), 3.0 * std::sqrt(mu2 / n));
}

TEST(Sampling, LargeOrderMoments) {
  Rng rng(506);
  const NcChi2Params p{5000.0, 2000.0, 0.001};
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ncchi2::sample(p, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  const double c2 = p.scale * p.scale;
  const double mu2 = c2 * 2.0 * (p.order + 2.0 * p.noncentrality);
  const double mu4 = c2 * c2 *
                     (12.0 * (p.order + 2.0 * p.noncentrality) *
                          (p.order + 2.0 * p.noncentrality) +
                      48.0 * (p.order + 4.0 * p.noncentrality));
  EXPECT_NEAR(mean, ncchi2::mean(p), 3.0 * std::sqrt(mu2 / n));
  EXPECT_NEAR(var, ncchi2::variance(p), 3.0 * std::sqrt((mu4 - mu2 * mu2) / n));
}

TEST(PowerSpectrumLogLikelihood, DecomposesIntoScalarCalls) {
  Rng rng(507);
  const std::uint32_t L = 4;
  const Signal x = random_signal(L, rng);
  PowerSpectrum phat;
  phat.L = L;
  phat.eta = make_eta(L);
  phat.comps = {1.3, 0.8, 0.4};
  const auto ctx = build_pt_given_xt(1.0, 0.0, 1, L);
  const double ll = power_spectrum_log_likelihood(phat, x, ctx);
  const Spectrum fx = signal::unitary_dft(x);
  double expect = 0.0;
  const double eta[3] = {1.0, 2.0, 1.0};
  for (int l = 0; l < 3; ++l) {
    const double en = eta[l];
    expect += log_pdf({en, en * std::norm(fx[l]), 1.0 / en}, phat.comps[l]);
  }
  EXPECT_NEAR(ll, expect, 1e-12 * std::abs(expect));
}

TEST(PowerSpectrumLogLikelihood, ZeroSignalReducesToCentral) {
  const std::uint32_t L = 4;
  const Signal zero(L, 0.0);
  PowerSpectrum phat;
  phat.L = L;
  phat.eta = make_eta(L);
  phat.comps = {0.9, 1.1, 0.5};
  const double v = 2.0;
  const auto ctx = build_pt_given_xt(v, 0.0, 1, L);
  const double ll = power_spectrum_log_likelihood(phat, zero, ctx);
  double expect = 0.0;
  const double eta[3] = {1.0, 2.0, 1.0};
  for (int l = 0; l < 3; ++l)
    expect += log_pdf({eta[l], 0.0, v / eta[l]}, phat.comps[l]);
  // eta=2 component: alpha=2 scaled central chi^2 = Exponential with mean v.
  const double exp_l1 = -std::log(v) - phat.comps[1] / v;
  EXPECT_NEAR(log_pdf({2.0, 0.0, v / 2.0}, phat.comps[1]), exp_l1, 1e-12);
  EXPECT_NEAR(ll, expect, 1e-12 * std::abs(expect));
}

TEST(PowerSpectrumLogLikelihood, DiscriminatesTrueSignal) {
  Rng rng(508);
  const std::uint32_t L = 8;
  const std::uint64_t N = 50;
  const double sigma2 = 1.0;
  Signal x = random_signal(L, rng);
  const double scale = std::sqrt(8.0 / signal::norm2sq(x));
  for (auto& v : x) v *= scale;
  const Signal wrong = random_signal(L, rng);
  const auto ctx = build_pt_given_xt(sigma2, 0.0, N, L);
  double ll_true = 0.0, ll_wrong = 0.0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    const auto stats = forward::stream_stats(x, N, sigma2, derive_seed(99, "d", r), false);
    ll_true += power_spectrum_log_likelihood(stats.pspec, x, ctx);
    ll_wrong += power_spectrum_log_likelihood(stats.pspec, wrong, ctx);
  }
  EXPECT_GT(ll_true / reps, ll_wrong / reps);
}

TEST(ConditionalScore, ZeroStateHasZeroGradient) {
  const std::uint32_t L = 6;
  PowerSpectrum phat;
  phat.L = L;
  phat.eta = make_eta(L);
  phat.comps = {1.0, 0.5, 0.25, 0.125};
  const auto ctx = build_pt_given_xt(1.0, 0.5, 3, L);
  const Signal g = conditional_score(phat, Signal(L, 0.0), ctx);
  for (double v : g) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(ConditionalScore, MatchesFiniteDifferences) {
  Rng rng(509);
  for (std::uint32_t L : {5u, 9u, 16u}) {
    for (std::uint64_t N : {1ull, 3ull, 10ull}) {
      const Signal x = random_signal(L, rng);
      PowerSpectrum phat;
      phat.L = L;
      phat.eta = make_eta(L);
      phat.comps.resize(L / 2 + 1);
      for (auto& c : phat.comps) c = 0.2 + 2.0 * rng.uniform_co();
      const auto ctx = build_pt_given_xt(0.7, 0.4, N, L);
      const Signal g = conditional_score(phat, x, ctx);
      const double h = 1e-6;
      double num = 0.0, den = 0.0;
      for (std::uint32_t j = 0; j < L; ++j) {
        Signal xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (power_spectrum_log_likelihood(phat, xp, ctx) -
                           power_spectrum_log_likelihood(phat, xm, ctx)) /
                          (2.0 * h);
        num += (g[j] - fd) * (g[j] - fd);
        den += fd * fd;
      }
      EXPECT_LT(std::sqrt(num / den), 1e-4) << "L=" << L << " N=" << N;
    }
  }
}

TEST(ConditionalScore, LargeOrderRegimeMatchesFiniteDifferences) {
  Rng rng(513);
  const std::uint32_t L = 9;
  const std::uint64_t N = 10000;  // alpha = eta N up to 2e4: Sankaran path
  const Signal x = random_signal(L, rng);
  PowerSpectrum phat;
  phat.L = L;
  phat.eta = make_eta(L);
  phat.comps.resize(L / 2 + 1);
  for (auto& c : phat.comps) c = 0.5 + 2.0 * rng.uniform_co();
  const auto ctx = build_pt_given_xt(0.9, 0.3, N, L);
  const Signal g = conditional_score(phat, x, ctx);
  const double h = 1e-6;
  double num = 0.0, den = 0.0;
  for (std::uint32_t j = 0; j < L; ++j) {
    Signal xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double fd = (power_spectrum_log_likelihood(phat, xp, ctx) -
                       power_spectrum_log_likelihood(phat, xm, ctx)) /
                      (2.0 * h);
    num += (g[j] - fd) * (g[j] - fd);
    den += fd * fd;
  }
  EXPECT_LT(std::sqrt(num / den), 1e-4);
}

TEST(BuildPtGivenPhat, ClampAndMean) {
  PowerSpectrum phat;
  phat.L = 4;
  phat.eta = make_eta(4);
  phat.comps = {0.5, 5.0, 1.0};  // first below sigma2 -> central
  const double sigma2 = 1.0, sigma_t2 = 2.0;
  const auto params = build_pt_given_phat(phat, sigma2, sigma_t2, 7);
  ASSERT_EQ(params.size(), 3u);
  EXPECT_DOUBLE_EQ(params[0].noncentrality, 0.0);
  EXPECT_DOUBLE_EQ(params[0].order, 7.0);
  EXPECT_DOUBLE_EQ(params[1].order, 14.0);
  // mean = c (alpha + lambda) = sigma_t2 + max(P - sigma2, 0)
  EXPECT_NEAR(ncchi2::mean(params[1]), sigma_t2 + 4.0, 1e-12);
  EXPECT_NEAR(ncchi2::mean(params[2]), sigma_t2 + 0.0, 1e-12);
}

TEST(BuildPtGivenPhat, SamplingMatchesMean) {
  PowerSpectrum phat;
  phat.L = 4;
  phat.eta = make_eta(4);
  phat.comps = {6.0, 3.0, 2.0};
  const double sigma2 = 1.0, sigma_t2 = 0.5;
  const auto params = build_pt_given_phat(phat, sigma2, sigma_t2, 9);
  Rng rng(511);
  for (std::size_t l = 0; l < params.size(); ++l) {
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += ncchi2::sample(params[l], rng);
    const double se = std::sqrt(ncchi2::variance(params[l]) / n);
    EXPECT_NEAR(s / n, sigma_t2 + std::max(phat.comps[l] - sigma2, 0.0), 3.0 * se);
  }
}

TEST(BuildPtGivenXt, RecoversDataLikelihoodAtTZero) {
  const auto ctx = build_pt_given_xt(2.5, 0.0, 11, 8);
  EXPECT_DOUBLE_EQ(ctx.sigma2 + ctx.variance_t, 2.5);
  EXPECT_EQ(ctx.N, 11u);
  EXPECT_EQ(ctx.eta, make_eta(8));
}

TEST(BuildPtGivenXt, MonteCarloMoments) {
  // Simulating observations of x at total noise v = sigma2 + sigma_t2 gives
  // P^ moments matching the built parametrization.
  Rng rng(512);
  const std::uint32_t L = 8;
  const std::uint64_t N = 64;
  const double sigma2 = 0.8, sigma_t2 = 0.7;
  const double v = sigma2 + sigma_t2;
  Signal x = random_signal(L, rng);
  const Spectrum fx = signal::unitary_dft(x);
  const int reps = 4000;
  std::vector<double> acc(L / 2 + 1, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto stats = forward::stream_stats(x, N, v, derive_seed(513, "mc", r), false);
    for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += stats.pspec.comps[l];
  }
  const auto eta = make_eta(L);
  for (std::size_t l = 0; l < acc.size(); ++l) {
    const double en = static_cast<double>(eta[l]) * N;
    const NcChi2Params p{en, en / v * std::norm(fx[l]), v / en};
    const double expect = ncchi2::mean(p);  // v + |Fx[l]|^2
    const double se = std::sqrt(ncchi2::variance(p) / (reps * 1.0) * 1.0 /
                                static_cast<double>(1));
    EXPECT_NEAR(acc[l] / reps, expect, 3.0 * std::sqrt(ncchi2::variance(p) / reps))
        << "l=" << l;
    EXPECT_NEAR(expect, v + std::norm(fx[l]), 1e-12);
    (void)se;
  }
}
