#pragma once

#include <cmath>
#include <cstdint>

namespace geoshield::simnet {

// Deterministic PRNG stack. Nothing here uses <random> distributions, whose
// outputs are implementation-defined; identical seeds must give identical
// traces on any conforming build.

constexpr std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Sequential generator (xoshiro256++), seeded via splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        for (auto& w : s_) w = splitmix64(seed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1): 53-bit mantissa method.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) without modulo bias (Lemire rejection).
    std::uint64_t below(std::uint64_t n) {
        while (true) {
            std::uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (0ULL - n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    std::int64_t uniform_i64(std::int64_t lo, std::int64_t hi) {  // inclusive range
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return u01() < p; }

    // Rounds until the next success of a per-round Bernoulli(p), counting the
    // success round itself (>= 1). Saturates for p ~ 0.
    std::uint64_t geometric_skip(double p) {
        if (p >= 1.0) return 1;
        if (p <= 1e-300) return UINT64_MAX;
        double u = u01();
        double g = std::floor(std::log1p(-u) / std::log1p(-p));
        if (g >= 9e18) return UINT64_MAX;
        return static_cast<std::uint64_t>(g) + 1;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Counter-based uniform draw keyed by (seed, k1, k2, k3): the outcome of one
// random decision depends only on its key, never on event processing order.
inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0,
                               std::uint64_t k3 = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s) ^ (k1 * 0xda942042e4dd58b5ULL);
    s = a;
    std::uint64_t b = splitmix64(s) ^ (k2 * 0xca5a826395121157ULL);
    s = b ^ (k3 * 0x9fb21c651e98df25ULL);
    splitmix64(s);
    return splitmix64(s);
}

inline double keyed_u01(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0,
                        std::uint64_t k3 = 0) {
    return static_cast<double>(keyed_u64(seed, k1, k2, k3) >> 11) * 0x1.0p-53;
}

}  // namespace geoshield::simnet
