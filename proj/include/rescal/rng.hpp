#pragma once

#include <cstdint>

namespace rescal {

/**
 * Deterministic 64-bit generator (splitmix64).  All Monte-Carlo code derives
 * child generators from one master seed so that reruns with the same seed are
 * byte-identical across platforms; std distributions are avoided on purpose.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /** Uniform double in [0, 1). */
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /** Uniform double in [lo, hi). */
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /** Uniform integer in [0, n). */
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /** Child generator for an independent subtask; deterministic in (seed, tag). */
  Rng child(std::uint64_t tag) const {
    Rng mix(state_ ^ (0xd1342543de82ef95ull * (tag + 1)));
    mix.next_u64();
    return Rng(mix.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace rescal
