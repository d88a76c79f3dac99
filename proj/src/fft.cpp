#include "mra/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace mra::fft {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex g_mutex;
std::map<std::uint32_t, PlanPair>& plan_cache() {
  static std::map<std::uint32_t, PlanPair> cache;
  return cache;
}

// FFTW_UNALIGNED so new-array execution works on any std::vector storage.
PlanPair& plans_for(std::uint32_t L) {
  std::lock_guard<std::mutex> lock(g_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(L);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(L);
  PlanPair p;
  p.fwd = fftw_plan_dft_1d(static_cast<int>(L), buf, buf, FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inv = fftw_plan_dft_1d(static_cast<int>(L), buf, buf, FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  return cache.emplace(L, p).first->second;
}

}  // namespace

void forward_raw(const std::complex<double>* in, std::complex<double>* out,
                 std::uint32_t L) {
  PlanPair& p = plans_for(L);
  fftw_execute_dft(p.fwd,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void inverse_raw(const std::complex<double>* in, std::complex<double>* out,
                 std::uint32_t L) {
  PlanPair& p = plans_for(L);
  fftw_execute_dft(p.inv,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace mra::fft
