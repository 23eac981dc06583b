#pragma once

#include <cstdint>
#include <random>

namespace etcnet {

/// Deterministic random stream. All sampling goes through this wrapper so
/// trajectories are reproducible bit-for-bit across runs and platforms:
/// the distribution transforms are written out here instead of relying on
/// the implementation-defined <random> distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<int>(x % bound);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream. Forks of the same parent with distinct tags
  /// are decorrelated regardless of how much the parent has been consumed.
  Rng fork(std::uint64_t tag) const { return Rng(mix(seed_ ^ (0x9e3779b97f4a7c15ULL + tag * 0xbf58476d1ce4e5b9ULL))); }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace etcnet
