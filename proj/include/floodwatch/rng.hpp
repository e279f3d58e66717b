#pragma once

// Deterministic randomness for the whole toolkit.
//
// Generator: xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
// Distributions are implemented here rather than taken from <random>
// because the standard distributions are not bit-reproducible across
// library implementations; these are, for a fixed build.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace floodwatch {

// Stream-splitting mixer; also usable as a tiny standalone generator.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Derives an independent sub-seed for stream `index` of a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    SplitMix64 mix(root ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    return mix.next();
}

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 mix(seed);
        for (auto& word : s_) word = mix.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased uniform integer in [0, bound); bound > 0.
    std::uint64_t uniform_u64(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Box-Muller; a fresh pair of uniforms per call keeps call sites
    // order-independent of each other.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586477 * u2);
    }

    // Exponential inter-arrival gap for a Poisson process of the given rate.
    double exponential(double rate) {
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return -std::log1p(-u) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

// Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, Xoshiro256& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_u64(i));
        std::swap(items[i - 1], items[j]);
    }
}

// k distinct indices from [0, n), in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           Xoshiro256& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_u64(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

} // namespace floodwatch
