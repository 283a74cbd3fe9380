#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace d2dlab {

// Deterministic random source used everywhere in the project.
//
// The engine is std::mt19937_64, whose output sequence is pinned down by the
// C++ standard, so a given seed produces the same stream on every platform.
// The distribution transforms are hand-rolled below because the <random>
// distribution classes are explicitly implementation-defined and would break
// cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Inverse-CDF exponential draw with the given mean.
  // log1p keeps precision when uniform() lands near zero.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // Unbiased integer in [0, n). Rejection sampling removes the modulo bias.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  // Product-of-uniforms Poisson draw. Means above 30 are split into
  // independent chunks so exp(-mean) stays well away from underflow.
  unsigned poisson(double mean) {
    assert(mean >= 0.0);
    unsigned total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  // Standard normal via Box-Muller (one value per call; the spare is kept).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  unsigned poisson_small(double mean) {
    const double limit = std::exp(-mean);
    unsigned k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stable per-stream seed derivation (replication i gets stream i, and so on).
// This is the splitmix64 finalizer applied to master + (stream+1)*golden.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace d2dlab
