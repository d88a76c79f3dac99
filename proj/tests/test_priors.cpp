#include "mra/priors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mra/signal.hpp"

using namespace mra;
using namespace mra::priors;

TEST(StepPrior, TemplateGeometry) {
  const Signal u = step_template(4);
  const double h = std::sqrt(2.0);
  EXPECT_EQ(u, (Signal{h, h, 0.0, 0.0}));
  EXPECT_NEAR(signal::norm2sq(u), 4.0, 1e-12);
}

TEST(StepPrior, DrawsHaveUnitEnergyPerSample) {
  Rng rng(31);
  for (std::uint32_t L : {4u, 7u, 41u}) {
    for (int i = 0; i < 10; ++i) {
      const Signal x = sample_step_prior(L, rng);
      EXPECT_NEAR(signal::norm2sq(x), static_cast<double>(L), 1e-12 * L);
    }
  }
}

TEST(StepPrior, ExactlyTwoLevels) {
  Rng rng(32);
  const std::uint32_t L = 9;
  const double h = step_height(L);
  const std::uint32_t support = (L + 1) / 2;
  for (int i = 0; i < 25; ++i) {
    const Signal x = sample_step_prior(L, rng);
    std::uint32_t high = 0, zero = 0;
    for (double v : x) {
      if (std::abs(v - h) < 1e-12) ++high;
      else if (std::abs(v) < 1e-12) ++zero;
    }
    EXPECT_EQ(high, support);
    EXPECT_EQ(zero, L - support);
  }
}

TEST(StepPrior, UniformOverOrbit) {
  Rng rng(33);
  const std::uint32_t L = 8;
  const Signal u = step_template(L);
  const int n = 10000;
  std::map<std::uint32_t, int> counts;
  for (int i = 0; i < n; ++i) {
    const Signal x = sample_step_prior(L, rng);
    counts[signal::best_alignment(u, x)]++;
  }
  // Multinomial: each orbit representative 1/8 +- 3 SE.
  const double expect = n / 8.0;
  const double se = std::sqrt(n * (1.0 / 8.0) * (7.0 / 8.0));
  ASSERT_EQ(counts.size(), 8u);
  for (const auto& [phi, c] : counts) EXPECT_NEAR(c, expect, 3.0 * se) << phi;
}

TEST(BellPrior, SingleBumpEdgeOfSummation) {
  // K = 0 still sums one term (k = 0..K).
  const std::uint32_t L = 15;
  const detail::BellBump bump{1.5, 4.0, 7.25};
  const Signal x = detail::bell_from_bumps(L, {bump});
  double peak = 0.0;
  std::uint32_t argpeak = 0;
  for (std::uint32_t l = 0; l < L; ++l) {
    EXPECT_GE(x[l], 0.0);
    if (x[l] > peak) {
      peak = x[l];
      argpeak = l;
    }
  }
  EXPECT_TRUE(argpeak == 7 || argpeak == 8);
  EXPECT_NEAR(peak, 1.5 / std::sqrt(2.0 * M_PI * 4.0) *
                        std::exp(-0.5 * 0.25 * 0.25 / 4.0),
              1e-12);
}

TEST(BellPrior, WrapIsCentered) {
  EXPECT_DOUBLE_EQ(detail::wrap_centered(0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(detail::wrap_centered(4.9, 10.0), 4.9);
  EXPECT_DOUBLE_EQ(detail::wrap_centered(5.0, 10.0), -5.0);
  EXPECT_DOUBLE_EQ(detail::wrap_centered(9.0, 10.0), -1.0);
  EXPECT_DOUBLE_EQ(detail::wrap_centered(-6.0, 10.0), 4.0);
}

TEST(BellPrior, NonNegativeAndFinite) {
  Rng rng(34);
  PriorSpec spec;
  spec.kind = PriorKind::Bell;
  spec.L = 41;
  for (int i = 0; i < 50; ++i) {
    const Signal x = sample_bell_prior(spec, rng);
    for (double v : x) {
      EXPECT_GE(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(BellPrior, MeanCurveIsFlat) {
  // Translation invariance of C_k makes the componentwise mean constant.
  Rng rng(35);
  PriorSpec spec;
  spec.kind = PriorKind::Bell;
  spec.L = 41;
  const int n = 10000;
  Signal acc(spec.L, 0.0);
  Signal acc2(spec.L, 0.0);
  for (int i = 0; i < n; ++i) {
    const Signal x = sample_bell_prior(spec, rng);
    for (std::uint32_t l = 0; l < spec.L; ++l) {
      acc[l] += x[l];
      acc2[l] += x[l] * x[l];
    }
  }
  double grand = 0.0;
  for (std::uint32_t l = 0; l < spec.L; ++l) grand += acc[l] / n;
  grand /= spec.L;
  for (std::uint32_t l = 0; l < spec.L; ++l) {
    const double m = acc[l] / n;
    const double var = acc2[l] / n - m * m;
    const double se = std::sqrt(var / n);
    EXPECT_NEAR(m, grand, 3.0 * se) << "component " << l;
  }
}

TEST(PriorMean, StepExactMean) {
  const Signal exact = step_prior_exact_mean(4);
  for (double v : exact) EXPECT_NEAR(v, std::sqrt(2.0) / 2.0, 1e-14);
}

TEST(PriorMean, StepEmpiricalApproachesExact) {
  Rng rng(36);
  PriorSpec spec;
  spec.kind = PriorKind::Step;
  spec.L = 8;
  const int n = 100000;
  const Signal mean = prior_mean(spec, n, rng);
  const Signal exact = step_prior_exact_mean(8);
  // Per-component variance of the step prior: E[x^2] - mean^2.
  const double h = step_height(8);
  const double p_high = std::ceil(8 / 2.0) / 8.0;
  const double var = h * h * p_high - exact[0] * exact[0];
  const double se = std::sqrt(var / n);
  for (std::uint32_t l = 0; l < 8; ++l) EXPECT_NEAR(mean[l], exact[l], 3.0 * se);
}

TEST(PriorMean, BellEmpiricalIsConstant) {
  Rng rng(37);
  PriorSpec spec;
  spec.kind = PriorKind::Bell;
  spec.L = 41;
  const Signal mean = prior_mean(spec, 20000, rng);
  double grand = 0.0;
  for (double v : mean) grand += v;
  grand /= spec.L;
  for (double v : mean) EXPECT_NEAR(v, grand, 0.05 * grand);
}

TEST(MakeTrueSignal, NormalizesToGridEnergy) {
  Rng rng(38);
  for (PriorKind kind : {PriorKind::Step, PriorKind::Bell}) {
    PriorSpec spec;
    spec.kind = kind;
    spec.L = 41;
    const TrueSignal t = make_true_signal(spec, rng);
    EXPECT_NEAR(signal::norm2sq(t.x), 41.0, 1e-12 * 41.0);
    if (kind == PriorKind::Step) EXPECT_NEAR(t.scale, 1.0, 1e-12);
  }
}

TEST(Determinism, SameSeedSameDraws) {
  PriorSpec spec;
  spec.kind = PriorKind::Bell;
  spec.L = 23;
  Rng a(99), b(99);
  for (int i = 0; i < 5; ++i) {
    const Signal xa = sample_bell_prior(spec, a);
    const Signal xb = sample_bell_prior(spec, b);
    ASSERT_EQ(xa.size(), xb.size());
    for (std::size_t j = 0; j < xa.size(); ++j) EXPECT_EQ(xa[j], xb[j]);
  }
  Rng c(100);
  const Signal xc = sample_bell_prior(spec, c);
  const Signal xa = sample_bell_prior(spec, a);
  bool all_equal = true;
  for (std::size_t j = 0; j < xa.size(); ++j) all_equal &= xa[j] == xc[j];
  EXPECT_FALSE(all_equal);
}
