#include "mra/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "mra/fft.hpp"
#include "mra/parallel.hpp"

namespace mra::forward {

namespace {

struct StatAccum {
  double sum = 0.0;                           // grand sum of components
  std::vector<double> psum;                   // full-length |Fy|^2 sums
  std::vector<std::complex<double>> bsum;     // L*L bispectrum sums

  void init(std::uint32_t L, bool with_bispec) {
    psum.assign(L, 0.0);
    if (with_bispec) bsum.assign(static_cast<std::size_t>(L) * L, {0.0, 0.0});
  }

  void merge(const StatAccum& o) {
    sum += o.sum;
    for (std::size_t i = 0; i < psum.size(); ++i) psum[i] += o.psum[i];
    for (std::size_t i = 0; i < bsum.size(); ++i) bsum[i] += o.bsum[i];
  }
};

void accumulate_row(const double* row, std::uint32_t L, bool with_bispec,
                    std::vector<std::complex<double>>& buf, StatAccum& acc) {
  for (std::uint32_t j = 0; j < L; ++j) {
    acc.sum += row[j];
    buf[j] = row[j];
  }
  fft::forward_raw(buf.data(), buf.data(), L);
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  for (std::uint32_t l = 0; l < L; ++l) buf[l] *= s;
  for (std::uint32_t l = 0; l < L; ++l) acc.psum[l] += std::norm(buf[l]);
  if (with_bispec) {
    for (std::uint32_t k1 = 0; k1 < L; ++k1) {
      const std::complex<double> a = buf[k1];
      std::complex<double>* out = acc.bsum.data() + static_cast<std::size_t>(k1) * L;
      for (std::uint32_t k2 = 0; k2 < L; ++k2) {
        const std::uint32_t k3 = k1 + k2 >= L ? k1 + k2 - L : k1 + k2;
        out[k2] += a * buf[k2] * std::conj(buf[k3]);
      }
    }
  }
}

SampleStats finalize(StatAccum& acc, std::uint32_t L, std::uint64_t N,
                     double sigma2, std::uint64_t seed, bool with_bispec) {
  SampleStats st;
  st.L = L;
  st.N = N;
  st.sigma2 = sigma2;
  st.seed = seed;
  st.mean = acc.sum / (static_cast<double>(N) * L);
  st.pspec.L = L;
  st.pspec.eta = make_eta(L);
  st.pspec.comps.resize(L / 2 + 1);
  for (std::uint32_t l = 0; l <= L / 2; ++l)
    st.pspec.comps[l] = acc.psum[l] / static_cast<double>(N);
  if (with_bispec) {
    BispectrumMat b;
    b.L = L;
    b.mat.resize(acc.bsum.size());
    for (std::size_t i = 0; i < acc.bsum.size(); ++i)
      b.mat[i] = acc.bsum[i] / static_cast<double>(N);
    st.bispec = std::move(b);
  }
  return st;
}

}  // namespace

void fill_observation(const Signal& x, double sigma2, std::uint64_t seed,
                      std::uint64_t n, double* row, std::uint32_t* shift_out) {
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  Rng rng(derive_seed(seed, "obs", n));
  const std::uint32_t phi = static_cast<std::uint32_t>(rng.below(L));
  const double sigma = std::sqrt(sigma2);
  for (std::uint32_t j = 0; j < L; ++j) {
    const std::uint32_t src = (j + L - phi) % L;
    row[j] = x[src] + (sigma2 > 0.0 ? sigma * rng.normal() : 0.0);
  }
  if (shift_out) *shift_out = phi;
}

MraDataset generate_observations(const Signal& x, std::uint64_t N, double sigma2,
                                 std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("generate_observations: N must be >= 1");
  if (sigma2 < 0.0) throw std::invalid_argument("generate_observations: sigma2 < 0");
  if (x.size() < 2) throw std::invalid_argument("generate_observations: L must be >= 2");
  MraDataset d;
  d.L = static_cast<std::uint32_t>(x.size());
  d.N = N;
  d.sigma2 = sigma2;
  d.seed = seed;
  d.obs.resize(N * d.L);
  d.true_shifts.resize(N);
  parallel_chunks(N, worker_count(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n)
      fill_observation(x, sigma2, seed, n, d.row(n), &d.true_shifts[n]);
  });
  return d;
}

double sample_mean(const MraDataset& d) {
  double s = 0.0;
  for (double v : d.obs) s += v;
  return s / (static_cast<double>(d.N) * d.L);
}

SampleStats compute_stats(const MraDataset& d, bool with_bispectrum) {
  const int workers = worker_count();
  std::vector<StatAccum> parts(workers);
  parallel_chunks(d.N, workers, [&](int c, std::size_t b, std::size_t e) {
    parts[c].init(d.L, with_bispectrum);
    std::vector<std::complex<double>> buf(d.L);
    for (std::size_t n = b; n < e; ++n)
      accumulate_row(d.row(n), d.L, with_bispectrum, buf, parts[c]);
  });
  StatAccum acc;
  acc.init(d.L, with_bispectrum);
  for (auto& p : parts)
    if (!p.psum.empty()) acc.merge(p);
  return finalize(acc, d.L, d.N, d.sigma2, d.seed, with_bispectrum);
}

SampleStats stream_stats(const Signal& x, std::uint64_t N, double sigma2,
                         std::uint64_t seed, bool with_bispectrum) {
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  const int workers = worker_count();
  std::vector<StatAccum> parts(workers);
  parallel_chunks(N, workers, [&](int c, std::size_t b, std::size_t e) {
    parts[c].init(L, with_bispectrum);
    std::vector<double> row(L);
    std::vector<std::complex<double>> buf(L);
    for (std::size_t n = b; n < e; ++n) {
      fill_observation(x, sigma2, seed, n, row.data(), nullptr);
      accumulate_row(row.data(), L, with_bispectrum, buf, parts[c]);
    }
  });
  StatAccum acc;
  acc.init(L, with_bispectrum);
  for (auto& p : parts)
    if (!p.psum.empty()) acc.merge(p);
  return finalize(acc, L, N, sigma2, seed, with_bispectrum);
}

PowerSpectrum sample_power_spectrum(const MraDataset& d) {
  return compute_stats(d, false).pspec;
}

BispectrumMat sample_bispectrum(const MraDataset& d) {
  return *compute_stats(d, true).bispec;
}

PowerSpectrum debias_power_spectrum(const PowerSpectrum& p, double sigma2) {
  if (sigma2 < 0.0) throw std::invalid_argument("debias_power_spectrum: sigma2 < 0");
  PowerSpectrum out = p;
  for (auto& c : out.comps) c = std::max(c - sigma2, 0.0);
  return out;
}

BispectrumMat debias_bispectrum(const BispectrumMat& b, double sigma2,
                                double mean_est) {
  BispectrumMat out = b;
  const std::uint32_t L = b.L;
  const double dc = std::sqrt(static_cast<double>(L)) * mean_est;
  const double bias = sigma2 * dc;
  for (std::uint32_t k1 = 0; k1 < L; ++k1) {
    for (std::uint32_t k2 = 0; k2 < L; ++k2) {
      int lines = 0;
      if (k1 == 0) ++lines;
      if (k2 == 0) ++lines;
      if ((k1 + k2) % L == 0) ++lines;
      if (lines) out.at(k1, k2) -= static_cast<double>(lines) * bias;
    }
  }
  return out;
}

BispectrumMat population_bispectrum(const Signal& x) {
  const std::uint32_t L = static_cast<std::uint32_t>(x.size());
  const Spectrum fx = signal::unitary_dft(x);
  BispectrumMat b;
  b.L = L;
  b.mat.resize(static_cast<std::size_t>(L) * L);
  for (std::uint32_t k1 = 0; k1 < L; ++k1)
    for (std::uint32_t k2 = 0; k2 < L; ++k2)
      b.at(k1, k2) = fx[k1] * fx[k2] * std::conj(fx[(k1 + k2) % L]);
  return b;
}

}  // namespace mra::forward
