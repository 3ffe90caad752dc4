#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace kpifc {

// All randomness in the project flows through this wrapper. The engine is
// std::mt19937_64 (bit-exact sequence fixed by the standard); the double
// derivations are done here rather than with std::*_distribution so that
// streams are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller; consumes two uniforms per draw, no cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double mean) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -mean * std::log(u);
    }

    // Geometric dwell with the given mean (support {1, 2, ...}), via inverse CDF.
    long geometric_dwell(double mean) {
        if (mean <= 1.0) return 1;
        const double p = 1.0 / mean;
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return 1 + static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64, used to derive independent per-purpose seeds from the run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return splitmix64(base ^ h);
}

} // namespace kpifc
