#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "rydfac/units.hpp"

namespace rydfac::rng {

// Counter-based random numbers. A stream is a 64-bit key derived from the
// run's base seed and a tuple of indices (realization, trajectory, site, ...);
// draw n of a stream is mix64(key + (n+1) * golden). No state is carried, so
// results do not depend on the order in which streams are consumed.

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Domain tags keep streams for different purposes disjoint.
enum class Domain : std::uint64_t {
    disorder = 0x64697330,  // "dis0"
    jumps = 0x6a6d7030,     // "jmp0"
};

/// key = mix(...mix(mix(seed ^ tag) ^ i0) ^ i1 ...).
constexpr std::uint64_t stream_key(std::uint64_t base_seed, Domain domain,
                                   std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t key = mix64(base_seed ^ mix64(static_cast<std::uint64_t>(domain)));
    for (std::uint64_t idx : indices) key = mix64(key ^ mix64(idx + golden_gamma));
    return key;
}

constexpr std::uint64_t draw_bits(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(key + (counter + 1) * golden_gamma);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t key, std::uint64_t counter) noexcept {
    return static_cast<double>(draw_bits(key, counter) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on draws 2c and 2c+1.
inline double standard_normal(std::uint64_t key, std::uint64_t counter) noexcept {
    const double u1 = 1.0 - uniform01(key, 2 * counter);  // (0, 1]
    const double u2 = uniform01(key, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace rydfac::rng
