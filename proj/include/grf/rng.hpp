#pragma once

#include <cstdint>

namespace grf {

// splitmix64: tiny, platform-independent stream; library-owned so results do
// not depend on the standard library's distribution implementations.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * next_double(); }
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
};

}  // namespace grf
