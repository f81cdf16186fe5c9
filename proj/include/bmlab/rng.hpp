#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bmlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic random source. std::mt19937_64 supplies the raw word stream;
// all distribution transforms live here so sampled values never depend on the
// standard library's implementation-defined distribution objects. Identical
// seeds therefore reproduce identical draws across builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Decorrelated stream for a named sub-purpose of one base seed, so that
    // e.g. tree-shape draws and label draws can be varied independently.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n); rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bmlab
