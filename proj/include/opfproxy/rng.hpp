#pragma once

#include <cstdint>
#include <random>

namespace opfproxy {

/// splitmix64 mix; used to derive independent stream seeds from a base
/// seed and an index (chunk, tree, stage). Algorithm name recorded in
/// dataset metadata: streams are mt19937_64 seeded via splitmix64.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x51u));
}

using Rng = std::mt19937_64;

}  // namespace opfproxy
