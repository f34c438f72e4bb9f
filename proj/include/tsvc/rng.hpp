#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tsvc {

// Deterministic RNG stack used everywhere randomness is needed.
//
// Stream derivation is SplitMix64 (Steele, Lea & Flood 2014); the bulk
// generator is xoshiro256++ (Blackman & Vigna 2019) seeded from SplitMix64.
// Both have fixed published update rules, so a seed produces the same
// sequence on every platform and toolchain. Sub-streams (one permutation
// replicate, one simulation rep) are derived by index from a master seed,
// never from execution order, which keeps parallel runs bit-reproducible.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a child seed from a parent seed and a stream index.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b >> 17);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t s1, uint64_t s2) {
    return derive_seed(derive_seed(seed, s1), s2);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t s1, uint64_t s2, uint64_t s3) {
    return derive_seed(derive_seed(seed, s1, s2), s3);
}

class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    // xoshiro256++ step.
    uint64_t next() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0,1), 53-bit mantissa.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in (0,1]; safe as a log/Box-Muller argument.
    double uniform_open() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the sine partner is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }

    // Unbiased integer in [0, n) by Lemire's multiply-and-reject method.
    uint64_t below(uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t k = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[k]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Stream tags for the fixed sub-streams of a fit (see algorithm.cpp).
namespace rng_stream {
constexpr uint64_t split_test = 1;
constexpr uint64_t linear_screen = 2;
constexpr uint64_t scenario_data = 3;
constexpr uint64_t scenario_fit = 4;
}  // namespace rng_stream

}  // namespace tsvc
