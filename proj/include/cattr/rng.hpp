#pragma once

// Portable seeded randomness.
//
// Streams come from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The standard <random> distributions are NOT portable across
// library implementations, so every transform used by the simulators is
// written out here. Sub-seeds are derived by folding components through
// SplitMix64, so a stream is addressed by (seed, component, component, ...).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace cattr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace detail {
inline std::uint64_t seed_component(std::uint64_t v) { return v; }
inline std::uint64_t seed_component(std::int64_t v) { return static_cast<std::uint64_t>(v); }
inline std::uint64_t seed_component(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
inline std::uint64_t seed_component(unsigned v) { return v; }
inline std::uint64_t seed_component(std::string_view v) { return fnv1a64(v); }
inline std::uint64_t seed_component(const char* v) { return fnv1a64(v); }
}  // namespace detail

// derive_seed(master, "dataset", name, replication) -> independent sub-seed.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) {
  std::uint64_t h = splitmix64(base);
  ((h = splitmix64(h ^ detail::seed_component(parts))), ...);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; the second variate is kept for the next call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, 1) by Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u;
      do {
        u = uniform01();
      } while (u <= 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  double laplace(double scale) {
    const double u = uniform01() - 0.5;
    const double sign = u < 0 ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
  }

  // Fisher-Yates, identical on every platform.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(std::span<std::size_t>(p));
    return p;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cattr
