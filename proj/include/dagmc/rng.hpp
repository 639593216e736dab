#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dagmc {

// Seedable generator with platform-stable draws. std::mt19937_64 output is
// specified by the standard; the distribution wrappers below avoid the
// implementation-defined std::uniform_*_distribution mappings.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Bounded rejection sampling, bias-free.
    std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n + 1) % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x > limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double gamma(double shape) {
    // Marsaglia-Tsang; shape boost for shape < 1.
    if (shape < 1.0) {
      double u = uniform();
      while (u == 0.0) u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double dd = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * dd);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      while (u == 0.0) u = uniform();
      if (std::log(u) < 0.5 * x * x + dd - dd * v + dd * std::log(v)) return dd * v;
    }
  }

  double normal() {
    // Box-Muller, one value per call (cache dropped for simplicity).
    double u1 = uniform(), u2 = uniform();
    while (u1 == 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Deterministic stream splitting (splitmix64 of seed ^ stream tag).
  static std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dagmc
