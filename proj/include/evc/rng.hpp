#pragma once

#include <cstdint>
#include <random>

namespace evc {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Purpose tags keep independent draws for the same individual decorrelated,
/// e.g. changing mode weights must not shift charge-location draws.
enum class Stream : std::uint64_t {
    Synthesis = 1,
    ModeChoice = 2,
    ChargeLocation = 3,
};

using Rng = std::mt19937_64;

/// Independent generator for (seed, entity, purpose). Results depend only on
/// these three values, never on iteration order or thread count.
inline Rng make_stream(std::uint64_t seed, std::uint64_t entity, Stream purpose) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ entity);
    s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
    return Rng{s};
}

/// Uniform double in [0, 1) with 53 random bits. Portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace evc
