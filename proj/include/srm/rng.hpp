// Seed derivation and a small uniform sampler on top of std::mt19937_64.
//
// Every stochastic component takes an explicit seed and derives child seeds
// from (parent, index...) so that results do not depend on evaluation order or
// on the number of worker threads.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace srm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Uniform on [0, 1) with 53 random bits; identical across standard libraries,
    // unlike std::uniform_real_distribution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // +1 or -1 with equal probability.
    int sign() { return (engine_() >> 63) ? 1 : -1; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace srm
