#pragma once

#include <cstdint>
#include <random>

namespace cxlsim {

// SplitMix64 finalizer; used to derive independent seeds for sub-streams.
constexpr uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(a ^ mix_seed(b)); }

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(mix_seed(seed)) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_); }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Number of failures before the first success; mean is `mean`.
  uint64_t geometric(double mean) {
    if (mean <= 0.0) return 0;
    return std::geometric_distribution<uint64_t>(1.0 / (mean + 1.0))(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cxlsim
