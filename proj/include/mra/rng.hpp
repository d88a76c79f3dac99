#pragma once

#include <cstdint>
#include <string_view>

namespace mra {

// Self-contained splitmix64-based generator. Bit-exact across platforms and
// toolchains, cheap enough to re-seed per observation row, which is what makes
// generator replay by (seed, row) possible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double uniform_co() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), rejection-free bias removed by range trimming.
  std::uint64_t below(std::uint64_t n);

  // Standard normal, Box-Muller with cached spare (spare is part of the
  // generator state for determinism).
  double normal();

  // Gamma(shape, 1), Marsaglia-Tsang; shape < 1 handled by the boost trick.
  double gamma(double shape);

  double chi2(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Exact Poisson: Knuth product method, with mean-splitting so huge means
  // stay exact instead of overflowing exp(-mean).
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic seed derivation used everywhere a sub-stream is needed:
// seed = mix(base, fnv1a(tag), indices...). Documented in the README so an
// experiment cell can be reproduced in isolation.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t a, std::uint64_t b);

}  // namespace mra
