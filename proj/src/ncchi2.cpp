#include "mra/ncchi2.hpp"

#include <cmath>
#include <stdexcept>

namespace mra::ncchi2 {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void validate(const NcChi2Params& p, double z) {
  if (!(p.order > 0.0) || !std::isfinite(p.order) ||
      !(p.noncentrality >= 0.0) || !std::isfinite(p.noncentrality) ||
      !(p.scale > 0.0) || !std::isfinite(p.scale))
    throw std::invalid_argument("ncchi2: invalid parameters");
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::invalid_argument("ncchi2: z must be positive and finite");
}

// Sankaran's h-power normal approximation for the non-central chi-square:
// (W/(alpha+lambda))^h is approximately N(mu, sz^2). Reduces to the
// Wilson-Hilferty cube root at lambda = 0 (h = 1/3).
struct Sankaran {
  double s;   // alpha + lambda
  double h, p, m;
  double mu, sz;
};

Sankaran sankaran_params(double alpha, double lambda) {
  Sankaran sk;
  const double s = alpha + lambda;
  const double d = alpha + 2.0 * lambda;
  const double t = alpha + 3.0 * lambda;
  sk.s = s;
  sk.h = 1.0 - (2.0 / 3.0) * s * t / (d * d);
  sk.p = d / (s * s);
  sk.m = (sk.h - 1.0) * (1.0 - 3.0 * sk.h);
  sk.mu = 1.0 + sk.h * sk.p * (sk.h - 1.0 - 0.5 * (2.0 - sk.h) * sk.m * sk.p);
  sk.sz = sk.h * std::sqrt(2.0 * sk.p) * (1.0 + 0.5 * sk.m * sk.p);
  return sk;
}

}  // namespace

namespace detail {

double log_central_chi2_pdf(double w, double alpha) {
  return (0.5 * alpha - 1.0) * std::log(w) - 0.5 * w -
         std::lgamma(0.5 * alpha) - 0.5 * alpha * kLn2;
}

double log_pdf_exact(const NcChi2Params& p, double z) {
  const double w = z / p.scale;
  const double alpha = p.order;
  const double lambda = p.noncentrality;
  const double log_c = std::log(p.scale);
  if (lambda <= 0.0) return log_central_chi2_pdf(w, alpha) - log_c;

  // Poisson-mixture series sum_j e^{-l/2}(l/2)^j/j! f_{a+2j}(w), summed
  // outward from the dominant index in log space. Consecutive scaled terms
  // differ by the exact ratio e^r / ((j+1)(a/2+j)), so only one lgamma pair
  // is needed.
  const double r = std::log(lambda * w * 0.25);
  const double half_alpha = 0.5 * alpha;
  const double jstar = 0.5 * (-half_alpha + std::sqrt(half_alpha * half_alpha +
                                                      lambda * w));
  const double j0 = std::max(0.0, std::floor(jstar));
  const double base = -0.5 * lambda - 0.5 * w + (half_alpha - 1.0) * std::log(w) -
                      half_alpha * kLn2;
  const double ln_peak = base + j0 * r - std::lgamma(j0 + 1.0) -
                         std::lgamma(half_alpha + j0);
  const double er = std::exp(r);
  double sum = 1.0;
  double t = 1.0;
  for (double j = j0;; j += 1.0) {
    t *= er / ((j + 1.0) * (half_alpha + j));
    sum += t;
    if (t < 1e-18 * sum) break;
    if (j - j0 > 5e6) throw std::runtime_error("ncchi2: series failed to converge");
  }
  t = 1.0;
  for (double j = j0; j >= 1.0; j -= 1.0) {
    t *= (j * (half_alpha + j - 1.0)) / er;
    sum += t;
    if (t < 1e-18 * sum) break;
  }
  return ln_peak + std::log(sum) - log_c;
}

double bessel_i_ratio(double nu, double x) {
  // I_{nu+1}(x)/I_nu(x) = 1/(b1 + 1/(b2 + ...)), b_k = 2(nu+k)/x.
  const double tiny = 1e-300;
  double f = tiny, C = f, D = 0.0;
  for (long k = 1; k <= 20000000L; ++k) {
    const double b = 2.0 * (nu + static_cast<double>(k)) / x;
    D = b + D;
    if (D == 0.0) D = tiny;
    C = b + 1.0 / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15) return f;
  }
  throw std::runtime_error("ncchi2: Bessel-ratio continued fraction did not converge");
}

double dlogpdf_dlambda_exact(const NcChi2Params& p, double z) {
  const double w = z / p.scale;
  const double alpha = p.order;
  const double lambda = p.noncentrality;
  if (lambda <= 0.0) return 0.5 * (w / alpha - 1.0);
  const double x = std::sqrt(lambda * w);
  const double ratio = bessel_i_ratio(0.5 * alpha - 1.0, x);
  return 0.5 * (std::sqrt(w / lambda) * ratio - 1.0);
}

double log_pdf_large_order(const NcChi2Params& p, double z) {
  const double w = z / p.scale;
  const Sankaran sk = sankaran_params(p.order, p.noncentrality);
  const double v = std::pow(w / sk.s, sk.h);
  const double dev = (v - sk.mu) / sk.sz;
  // f_W(w) = phi((v - mu)/sz)/sz * dv/dw with dv/dw = h v / w.
  return -0.5 * std::log(2.0 * M_PI) - std::log(sk.sz) - 0.5 * dev * dev +
         std::log(sk.h) + std::log(v) - std::log(w) - std::log(p.scale);
}

double dlogpdf_dlambda_large_order(const NcChi2Params& p, double z) {
  const double w = z / p.scale;
  const double alpha = p.order;
  const double lambda = p.noncentrality;
  const Sankaran sk = sankaran_params(alpha, lambda);
  const double s = sk.s;
  const double d = alpha + 2.0 * lambda;
  const double t = alpha + 3.0 * lambda;
  // d/dlambda of every Sankaran ingredient (S' = 1, D' = 2, T' = 3).
  const double dh = -(2.0 / 3.0) * ((t + 3.0 * s) * d - 4.0 * s * t) / (d * d * d);
  const double dp = -2.0 * lambda / (s * s * s);
  const double dm = dh * (4.0 - 6.0 * sk.h);
  const double v = std::pow(w / s, sk.h);
  const double dv = v * (dh * std::log(w / s) - sk.h / s);
  const double a = sk.h - 1.0 - 0.5 * (2.0 - sk.h) * sk.m * sk.p;
  const double da = dh + 0.5 * dh * sk.m * sk.p -
                    0.5 * (2.0 - sk.h) * (dm * sk.p + sk.m * dp);
  const double dmu = dh * sk.p * a + sk.h * dp * a + sk.h * sk.p * da;
  const double b = 1.0 + 0.5 * sk.m * sk.p;
  const double dlnsz = dh / sk.h + dp / (2.0 * sk.p) +
                       0.5 * (dm * sk.p + sk.m * dp) / b;
  const double dev = v - sk.mu;
  return -dlnsz - dev * (dv - dmu) / (sk.sz * sk.sz) +
         dev * dev * dlnsz / (sk.sz * sk.sz) + dh / sk.h + dv / v;
}

}  // namespace detail

double log_pdf(const NcChi2Params& p, double z) {
  validate(p, z);
  return p.order > kLargeOrderAlpha ? detail::log_pdf_large_order(p, z)
                                    : detail::log_pdf_exact(p, z);
}

double dlogpdf_dlambda(const NcChi2Params& p, double z) {
  validate(p, z);
  return p.order > kLargeOrderAlpha ? detail::dlogpdf_dlambda_large_order(p, z)
                                    : detail::dlogpdf_dlambda_exact(p, z);
}

double mean(const NcChi2Params& p) {
  return p.scale * (p.order + p.noncentrality);
}

double variance(const NcChi2Params& p) {
  return p.scale * p.scale * (2.0 * p.order + 4.0 * p.noncentrality);
}

double sample(const NcChi2Params& p, Rng& rng) {
  const double alpha = p.order;
  const double lambda = p.noncentrality;
  if (alpha > kLargeOrderAlpha) {
    const Sankaran sk = sankaran_params(alpha, lambda);
    for (;;) {
      const double v = sk.mu + sk.sz * rng.normal();
      if (v > 0.0) return p.scale * sk.s * std::pow(v, 1.0 / sk.h);
    }
  }
  if (alpha >= 1.0) {
    const double g = rng.normal() + std::sqrt(lambda);
    double y = g * g;
    if (alpha > 1.0) y += 2.0 * rng.gamma(0.5 * (alpha - 1.0));
    return p.scale * y;
  }
  // alpha < 1: Poisson mixture of central chi-squares.
  const std::uint64_t k = rng.poisson(0.5 * lambda);
  return p.scale * 2.0 * rng.gamma(0.5 * alpha + static_cast<double>(k));
}

namespace {

const std::vector<std::uint8_t>& context_eta(const LikelihoodContext& ctx,
                                             std::uint32_t L,
                                             std::vector<std::uint8_t>& scratch) {
  if (!ctx.eta.empty()) {
    if (ctx.eta.size() != L / 2 + 1)
      throw std::invalid_argument("ncchi2: eta length mismatch");
    return ctx.eta;
  }
  scratch = make_eta(L);
  return scratch;
}

}  // namespace

double power_spectrum_log_likelihood(const PowerSpectrum& phat, const Signal& x,
                                     const LikelihoodContext& ctx) {
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  if (phat.L != L || phat.comps.size() != L / 2 + 1)
    throw std::invalid_argument("power_spectrum_log_likelihood: length mismatch");
  const double v = ctx.sigma2 + ctx.variance_t;
  if (!(v > 0.0))
    throw std::invalid_argument("power_spectrum_log_likelihood: sigma2 + variance_t must be > 0");
  std::vector<std::uint8_t> scratch;
  const auto& eta = context_eta(ctx, L, scratch);
  const Spectrum fx = signal::unitary_dft(x);
  double total = 0.0;
  for (std::uint32_t l = 0; l <= L / 2; ++l) {
    const double en = static_cast<double>(eta[l]) * static_cast<double>(ctx.N);
    const NcChi2Params p{en, en / v * std::norm(fx[l]), v / en};
    total += log_pdf(p, phat.comps[l]);
  }
  return total;
}

Signal conditional_score(const PowerSpectrum& phat_t, const Signal& x_t,
                         const LikelihoodContext& ctx) {
  const std::uint32_t L = static_cast<std::uint32_t>(x_t.size());
  if (phat_t.L != L || phat_t.comps.size() != L / 2 + 1)
    throw std::invalid_argument("conditional_score: length mismatch");
  const double v = ctx.sigma2 + ctx.variance_t;
  if (!(v > 0.0))
    throw std::invalid_argument("conditional_score: sigma2 + variance_t must be > 0");
  std::vector<std::uint8_t> scratch;
  const auto& eta = context_eta(ctx, L, scratch);
  const Spectrum fx = signal::unitary_dft(x_t);
  // d/dx sum_l log f_l = sum_l (eta_l N / v) D_l grad|Fx[l]|^2; the gradient
  // helper mirror-expands its weights (one eta_l factor), so pass (N/v) D_l.
  std::vector<double> weights(L / 2 + 1);
  for (std::uint32_t l = 0; l <= L / 2; ++l) {
    const double en = static_cast<double>(eta[l]) * static_cast<double>(ctx.N);
    const NcChi2Params p{en, en / v * std::norm(fx[l]), v / en};
    weights[l] = static_cast<double>(ctx.N) / v * dlogpdf_dlambda(p, phat_t.comps[l]);
  }
  return signal::power_spectrum_gradient(x_t, weights);
}

std::vector<NcChi2Params> build_pt_given_phat(const PowerSpectrum& phat,
                                              double sigma2, double sigma_t2,
                                              std::uint64_t N) {
  if (!(sigma_t2 > 0.0))
    throw std::invalid_argument("build_pt_given_phat: sigma_t2 must be > 0");
  std::vector<NcChi2Params> out(phat.comps.size());
  for (std::size_t l = 0; l < phat.comps.size(); ++l) {
    const double en = static_cast<double>(phat.eta[l]) * static_cast<double>(N);
    const double clean = std::max(phat.comps[l] - sigma2, 0.0);
    out[l] = NcChi2Params{en, en / sigma_t2 * clean, sigma_t2 / en};
  }
  return out;
}

LikelihoodContext build_pt_given_xt(double sigma2, double sigma_t2,
                                    std::uint64_t N, std::uint32_t L) {
  if (!(sigma2 + sigma_t2 > 0.0))
    throw std::invalid_argument("build_pt_given_xt: sigma2 + sigma_t2 must be > 0");
  LikelihoodContext ctx;
  ctx.N = N;
  ctx.sigma2 = sigma2;
  ctx.variance_t = sigma_t2;
  ctx.eta = make_eta(L);
  return ctx;
}

}  // namespace mra::ncchi2
