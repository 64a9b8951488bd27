#pragma once

#include <cstdint>

namespace harmonics {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, counter), so trajectories are reproducible regardless
// of iteration order or thread count.

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t event_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t base = mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ mix64(stream);
    return mix64(base + counter * 0x9e3779b97f4a7c15ULL);
}

// Uniform double in [0, 1) from 53 high bits.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double event_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return uniform01(event_bits(seed, stream, counter));
}

} // namespace harmonics
