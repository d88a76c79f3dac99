#include "mra/baselines.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mra/fft.hpp"
#include "mra/parallel.hpp"

namespace mra::baselines {

namespace {

using cplx = std::complex<double>;

Signal noiseless_estimate(const forward::MraDataset& d) {
  // Exact shifts: align every row onto the first and average.
  const std::uint32_t L = d.L;
  Signal ref(d.row(0), d.row(0) + L);
  Signal acc(L, 0.0);
  for (std::uint64_t n = 0; n < d.N; ++n) {
    Signal y(d.row(n), d.row(n) + L);
    const Signal a = signal::cyclic_shift(y, signal::best_alignment(y, ref));
    for (std::uint32_t j = 0; j < L; ++j) acc[j] += a[j];
  }
  for (auto& v : acc) v /= static_cast<double>(d.N);
  return acc;
}

struct EmAccum {
  std::vector<cplx> fourier;  // sum_n y^_n conj(w^_n)
  double loglik = 0.0;

  void init(std::uint32_t L) { fourier.assign(L, cplx{0.0, 0.0}); }
  void merge(const EmAccum& o) {
    for (std::size_t i = 0; i < fourier.size(); ++i) fourier[i] += o.fourier[i];
    loglik += o.loglik;
  }
};

}  // namespace

EmResult em_estimate(const forward::MraDataset& d, const EmConfig& cfg) {
  const std::uint32_t L = d.L;
  const std::uint64_t N = d.N;
  const double sigma2 = d.sigma2;
  if (N < 1 || L < 2) throw std::invalid_argument("em_estimate: empty dataset");
  if (sigma2 == 0.0) {
    EmResult r;
    r.estimate = noiseless_estimate(d);
    r.iters = 1;
    r.converged = true;
    return r;
  }
  if (sigma2 < 0.0) throw std::invalid_argument("em_estimate: sigma2 < 0");

  const double inv_sqrt_l = 1.0 / std::sqrt(static_cast<double>(L));
  const bool cache_spectra =
      static_cast<std::size_t>(N) * L * sizeof(cplx) <= cfg.cache_budget_bytes;
  std::vector<cplx> spectra;
  if (cache_spectra) {
    spectra.resize(static_cast<std::size_t>(N) * L);
    parallel_chunks(N, worker_count(), [&](int, std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) {
        cplx* row = spectra.data() + n * L;
        for (std::uint32_t j = 0; j < L; ++j) row[j] = d.row(n)[j];
        fft::forward_raw(row, row, L);
        for (std::uint32_t j = 0; j < L; ++j) row[j] *= inv_sqrt_l;
      }
    });
  }

  std::vector<double> ynorm2(N);
  parallel_chunks(N, worker_count(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      double s = 0.0;
      for (std::uint32_t j = 0; j < L; ++j) s += d.row(n)[j] * d.row(n)[j];
      ynorm2[n] = s;
    }
  });

  Signal x(L);
  if (cfg.init == EmConfig::Init::FirstObservation) {
    for (std::uint32_t j = 0; j < L; ++j) x[j] = d.row(0)[j];
  } else {
    Rng rng(derive_seed(cfg.seed, "em-init"));
    for (auto& v : x) v = rng.normal();
  }

  EmResult result;
  const double const_term =
      -std::log(static_cast<double>(L)) -
      0.5 * L * std::log(2.0 * M_PI * sigma2);
  const int workers = worker_count();

  for (std::uint64_t iter = 0; iter < cfg.max_iters; ++iter) {
    const Spectrum fx = signal::unitary_dft(x);
    const double xnorm2 = signal::norm2sq(x);
    std::vector<EmAccum> parts(workers);
    parallel_chunks(N, workers, [&](int c, std::size_t b, std::size_t e) {
      EmAccum& acc = parts[c];
      acc.init(L);
      std::vector<cplx> fy(L), q(L), fw(L);
      std::vector<double> corr(L), w(L);
      for (std::size_t n = b; n < e; ++n) {
        const cplx* yrow;
        if (cache_spectra) {
          yrow = spectra.data() + n * L;
        } else {
          for (std::uint32_t j = 0; j < L; ++j) fy[j] = d.row(n)[j];
          fft::forward_raw(fy.data(), fy.data(), L);
          for (std::uint32_t j = 0; j < L; ++j) fy[j] *= inv_sqrt_l;
          yrow = fy.data();
        }
        // corr[phi] = <S^phi x, y_n> for all phi at once.
        for (std::uint32_t l = 0; l < L; ++l) q[l] = std::conj(fx[l]) * yrow[l];
        fft::inverse_raw(q.data(), q.data(), L);
        for (std::uint32_t phi = 0; phi < L; ++phi) corr[phi] = q[phi].real();
        // Log-space softmax over shifts.
        double peak = corr[0];
        for (std::uint32_t phi = 1; phi < L; ++phi) peak = std::max(peak, corr[phi]);
        double z = 0.0;
        for (std::uint32_t phi = 0; phi < L; ++phi) {
          w[phi] = std::exp((corr[phi] - peak) / sigma2);
          z += w[phi];
        }
        acc.loglik += peak / sigma2 + std::log(z) -
                      (ynorm2[n] + xnorm2) / (2.0 * sigma2) + const_term;
        const double inv_z = 1.0 / z;
        for (std::uint32_t phi = 0; phi < L; ++phi) fw[phi] = w[phi] * inv_z;
        fft::forward_raw(fw.data(), fw.data(), L);
        for (std::uint32_t l = 0; l < L; ++l)
          acc.fourier[l] += yrow[l] * std::conj(fw[l] * inv_sqrt_l);
      }
    });
    EmAccum acc;
    acc.init(L);
    for (auto& p : parts)
      if (!p.fourier.empty()) acc.merge(p);
    result.loglik.push_back(acc.loglik);

    // x_new = F^H( sqrt(L)/N * sum_n y^_n conj(w^_n) )
    const double scale = std::sqrt(static_cast<double>(L)) / static_cast<double>(N);
    Spectrum fx_new(L);
    for (std::uint32_t l = 0; l < L; ++l) fx_new[l] = scale * acc.fourier[l];
    const Spectrum xt = signal::unitary_idft(fx_new);
    Signal x_new(L);
    for (std::uint32_t j = 0; j < L; ++j) x_new[j] = xt[j].real();

    double dn = 0.0;
    for (std::uint32_t j = 0; j < L; ++j) {
      const double dv = x_new[j] - x[j];
      dn += dv * dv;
    }
    const double rel_change = std::sqrt(dn) / std::max(signal::norm2(x), 1e-300);
    x = std::move(x_new);
    result.iters = iter + 1;
    if (rel_change < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.estimate = std::move(x);
  return result;
}

IpsResult ips_estimate(const forward::SampleStats& stats, double sigma2,
                       const IpsConfig& cfg) {
  if (!stats.bispec)
    throw std::invalid_argument("ips_estimate: statistics lack a bispectrum");
  const std::uint32_t L = stats.L;
  const PowerSpectrum pd = forward::debias_power_spectrum(stats.pspec, sigma2);
  const forward::BispectrumMat bd =
      forward::debias_bispectrum(*stats.bispec, sigma2, stats.mean);

  // Magnitudes from the debiased power spectrum, mirrored to full length.
  std::vector<double> mag(L);
  for (std::uint32_t l = 0; l < L; ++l)
    mag[l] = std::sqrt(std::max(pd.comps[std::min(l, L - l)], 0.0));

  const double dc = std::sqrt(static_cast<double>(L)) * stats.mean;
  std::vector<cplx> u(L);
  u[0] = dc >= 0.0 ? 1.0 : -1.0;
  Rng rng(derive_seed(cfg.seed, "ips-init"));
  for (std::uint32_t k = 1; k < L; ++k) {
    const double a = 2.0 * M_PI * rng.uniform_co();
    u[k] = cplx{std::cos(a), std::sin(a)};
  }

  IpsResult result;
  std::vector<cplx> u_new(L);
  for (std::uint32_t it = 0; it < cfg.max_iters; ++it) {
    // Weighted phasor average of the constraint phi_l + phi_{k-l} - beta.
    u_new[0] = u[0];
    for (std::uint32_t k = 1; k < L; ++k) {
      cplx acc{0.0, 0.0};
      for (std::uint32_t l = 0; l < L; ++l) {
        const std::uint32_t m = (k + L - l) % L;
        acc += std::conj(bd.at(l, m)) * u[l] * u[m];
      }
      const double mod = std::abs(acc);
      u_new[k] = mod > 0.0 ? acc / mod : u[k];
    }
    double residual = 0.0;
    for (std::uint32_t l = 0; l < L; ++l) {
      for (std::uint32_t m = 0; m < L; ++m) {
        const cplx b = bd.at(l, m);
        const double wgt = std::abs(b);
        if (wgt == 0.0) continue;
        const cplx mismatch =
            u_new[l] * u_new[m] * std::conj(u_new[(l + m) % L]) * std::conj(b / wgt);
        const double ang = std::atan2(mismatch.imag(), mismatch.real());
        residual += wgt * ang * ang;
      }
    }
    result.residual.push_back(residual);
    double delta = 0.0;
    for (std::uint32_t k = 1; k < L; ++k) {
      const cplx rot = u_new[k] * std::conj(u[k]);
      delta = std::max(delta, std::abs(std::atan2(rot.imag(), rot.real())));
    }
    u = u_new;
    result.iters = it + 1;
    if (delta < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  Spectrum fx(L);
  fx[0] = dc;  // DC carries the sample-mean magnitude and sign directly
  for (std::uint32_t l = 1; l < L; ++l) fx[l] = mag[l] * u[l];
  const Spectrum xt = signal::unitary_idft(fx);
  result.estimate.resize(L);
  for (std::uint32_t j = 0; j < L; ++j) result.estimate[j] = xt[j].real();
  return result;
}

}  // namespace mra::baselines
