#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ngdc {

// 64-bit FNV-1a over raw bytes; folds string ids into seed material.
constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// splitmix64 finalizer; decorrelates adjacent seed values.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Per-item sub-seed: stable in (seed, id, salt), independent of processing
// order, so parallel emission stays reproducible.
inline uint64_t derive_seed(uint64_t seed, std::string_view id, uint64_t salt = 0) {
    return mix64(mix64(seed ^ fnv1a64(id)) + salt);
}

inline std::mt19937_64 make_engine(uint64_t seed) { return std::mt19937_64{seed}; }

// Uniform draw in [0, n). Multiply-shift instead of
// std::uniform_int_distribution, whose output is implementation-defined;
// every draw here is pinned by the mt19937_64 stream alone.
inline uint64_t bounded(std::mt19937_64& eng, uint64_t n) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(eng()) * n) >> 64);
}

}  // namespace ngdc
