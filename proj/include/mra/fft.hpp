#pragma once

#include <complex>
#include <cstdint>

namespace mra::fft {

// Unnormalized c2c transforms (FFTW sign convention: forward = exp(-2πi jk/L)).
// Plans are cached per length behind a mutex; execution is thread-safe and
// in/out may alias.
void forward_raw(const std::complex<double>* in, std::complex<double>* out,
                 std::uint32_t L);
void inverse_raw(const std::complex<double>* in, std::complex<double>* out,
                 std::uint32_t L);

}  // namespace mra::fft
