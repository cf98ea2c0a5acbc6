#pragma once

#include <cstdint>
#include <random>

namespace qpath {

// Deterministic random stream. The library never owns a global source;
// callers construct streams and pass them in.
using RandomStream = std::mt19937_64;

// splitmix64 finalizer. Decorrelates per-trajectory seeds derived from a
// single master seed so that adjacent trajectory indices do not produce
// correlated mt19937_64 sequences.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline RandomStream make_stream(std::uint64_t seed) {
    return RandomStream(seed);
}

}  // namespace qpath
