#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fpsrl {

/// Seeded pseudo-random source. Wraps std::mt19937_64 and maps draws to
/// doubles with an explicit 53-bit construction so sequences do not depend on
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a master seed and a path of tags
  /// (e.g. iteration and particle index).
  static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(master, tags));
  }

  static std::uint64_t derive_seed(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix(master ^ 0x9e3779b97f4a7c15ULL);
    for (std::uint64_t t : tags) h = mix(h ^ mix(t + 0x632be59bd9b4e019ULL));
    return h;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace fpsrl
