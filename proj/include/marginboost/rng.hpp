// Deterministic random number utilities.
//
// All randomness in the library flows through these helpers so that a run is
// reproducible from a single 64-bit seed. The engine is std::mt19937_64 (fully
// specified by the standard); normal deviates use the Box-Muller transform and
// bounded integers use rejection sampling, so every draw sequence is a pure
// function of the seed within one build.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace marginboost {

/// SplitMix64 finalizer: a stateless 64-bit mixing step.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a per-run seed from a master seed and up to three stream indices.
/// Each component is absorbed through one SplitMix64 step, so distinct
/// (a, b, c) triples give statistically independent streams.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(master) ^ a;
    h = splitmix64(h) ^ b;
    h = splitmix64(h) ^ c;
    return splitmix64(h);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate via Box-Muller; the paired deviate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n) by rejection sampling (unbiased).
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool coin() { return (engine_() & 1u) != 0; }

    /// Fisher-Yates shuffle using bounded(); deterministic under the seed.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace marginboost
