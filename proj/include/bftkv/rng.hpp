#pragma once

#include <cstdint>
#include <random>

namespace bftkv {

/// Deterministic RNG wrapper. mt19937_64 output is pinned by the C++
/// standard; the distribution helpers here are hand-rolled because the
/// standard library distributions are not bit-stable across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform integer in [0, bound). bound must be nonzero.
    uint64_t below(uint64_t bound) { return next_u64() % bound; }

    /// Uniform integer in [lo, hi] inclusive.
    uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    /// Uniform double in [0, 1).
    double unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Geometric count of failures with success probability 1/mean
    /// (integer-only; unbounded tail). Returns at least 0.
    uint64_t geometric(uint64_t mean) {
        if (mean <= 1) return 0;
        uint64_t k = 0;
        // success when draw falls in the 1/mean slice
        while (below(mean) != 0) k++;
        return k;
    }

    bool chance(double p) { return unit() < p; }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

/// Stable seed derivation for per-actor streams: splitmix64 over
/// (seed, salt) so actor streams are independent of each other.
inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace bftkv
