#pragma once
// Seeded randomness with implementation-independent draws.
//
// std::mt19937_64 output is pinned by the standard, but the standard
// distributions are not; every draw here is derived from raw engine words
// so results are identical wherever the same seed is used.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace homog::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Folds a tuple of words into one seed; used to derive per-trial and
// per-permutation streams.
inline std::uint64_t mix(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
    for (std::uint64_t w : words) {
        h = splitmix64(h ^ w);
    }
    return h;
}

class Engine {
public:
    explicit Engine(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform on [0, 1) from the high 53 bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller on two fresh uniforms.
    double normal() {
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // Simple random sample of n indices from [0, pool) without replacement.
    std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t n) {
        std::vector<std::size_t> indices(pool);
        for (std::size_t i = 0; i < pool; ++i) indices[i] = i;
        for (std::size_t i = 0; i < n; ++i) {
            std::swap(indices[i], indices[i + below(pool - i)]);
        }
        indices.resize(n);
        return indices;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace homog::rng
