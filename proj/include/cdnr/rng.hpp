#pragma once

#include <cstdint>
#include <random>

namespace cdnr {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for (a, b) under a root seed. Used so that parallel
// and sequential runs draw identical numbers for the same logical unit of work.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return seed ^ mix64(mix64(a) + 0x632be59bd9b4e019ULL * (b + 1));
}

// [0, 1) from the top 53 bits of one draw
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace cdnr
