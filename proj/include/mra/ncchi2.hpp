#pragma once

#include <cstdint>
#include <vector>

#include "mra/rng.hpp"
#include "mra/signal.hpp"

namespace mra::ncchi2 {

// Parameters of the scaled non-central chi-squared variate c * chi'^2_alpha(lambda).
struct NcChi2Params {
  double order;          // alpha > 0 (degrees of freedom; eta_l * N in the likelihood)
  double noncentrality;  // lambda >= 0
  double scale;          // c > 0
};

// Per-component context for the power-spectrum likelihood: the effective
// variance is v = sigma2 + variance_t (variance_t = 0 recovers the data-time
// likelihood; at diffusion time t it is the perturbation variance).
struct LikelihoodContext {
  std::uint64_t N = 1;
  double sigma2 = 0.0;
  double variance_t = 0.0;
  std::vector<std::uint8_t> eta;
};

// Order threshold above which the Wilson-Hilferty cube-root normal
// approximation replaces the exact Bessel-series evaluation.
inline constexpr double kLargeOrderAlpha = 1000.0;

double log_pdf(const NcChi2Params& p, double z);
double dlogpdf_dlambda(const NcChi2Params& p, double z);
double sample(const NcChi2Params& p, Rng& rng);

double mean(const NcChi2Params& p);      // c (alpha + lambda)
double variance(const NcChi2Params& p);  // c^2 (2 alpha + 4 lambda)

// Sum over non-redundant l of log_pdf with alpha = eta_l N, c = v/(eta_l N),
// lambda = (eta_l N / v) |Fx[l]|^2.
double power_spectrum_log_likelihood(const PowerSpectrum& phat, const Signal& x,
                                     const LikelihoodContext& ctx);

// Gradient of the above in x, O(L log L).
Signal conditional_score(const PowerSpectrum& phat_t, const Signal& x_t,
                         const LikelihoodContext& ctx);

// Per-component law of P^_t[l] | P^: alpha = eta_l N, c = sigma_t2/(eta_l N),
// lambda = (eta_l N / sigma_t2) max{P^[l] - sigma2, 0}.
std::vector<NcChi2Params> build_pt_given_phat(const PowerSpectrum& phat,
                                              double sigma2, double sigma_t2,
                                              std::uint64_t N);

// Context for P^_t | X_t with v = sigma2 + sigma_t2.
LikelihoodContext build_pt_given_xt(double sigma2, double sigma_t2,
                                    std::uint64_t N, std::uint32_t L);

namespace detail {

// Exact evaluation: Poisson-mixture series in log space (equivalent to the
// Bessel-function form of the density).
double log_pdf_exact(const NcChi2Params& p, double z);
double dlogpdf_dlambda_exact(const NcChi2Params& p, double z);

// Large-order path: Wilson-Hilferty cube-root normal.
double log_pdf_large_order(const NcChi2Params& p, double z);
double dlogpdf_dlambda_large_order(const NcChi2Params& p, double z);

// I_{nu+1}(x) / I_nu(x) by modified-Lentz continued fraction.
double bessel_i_ratio(double nu, double x);

double log_central_chi2_pdf(double w, double alpha);

}  // namespace detail
}  // namespace mra::ncchi2
