#pragma once

#include <cstdint>
#include <random>

#include "rln/bytes.hpp"

namespace rln {

// All simulation randomness flows through mt19937_64, whose output sequence is
// fixed by the standard. Distributions are implemented here rather than taken
// from <random>, whose algorithms are implementation-defined.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for a named purpose under one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x5157ULL));
}

// Uniform in [0, n), n > 0, by rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// Uniform in [lo, hi], lo <= hi.
inline std::int64_t uniform_between(Rng& rng, std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo);
    if (span == UINT64_MAX) return static_cast<std::int64_t>(rng());
    return lo + static_cast<std::int64_t>(uniform_below(rng, span + 1));
}

template <std::uniform_random_bit_generator G>
Bytes random_bytes(G& rng, std::size_t n) {
    static_assert(G::min() == 0 && G::max() == UINT64_MAX, "needs a 64-bit generator");
    Bytes out(n);
    for (std::size_t i = 0; i < n; i += 8) {
        std::uint64_t w = rng();
        for (std::size_t j = 0; j < 8 && i + j < n; ++j) out[i + j] = static_cast<std::uint8_t>(w >> (56 - 8 * j));
    }
    return out;
}

template <typename Container, std::uniform_random_bit_generator G>
void shuffle(Container& c, G& rng) {
    for (std::size_t i = c.size(); i > 1; --i) {
        std::size_t j = uniform_below(rng, i);
        std::swap(c[i - 1], c[j]);
    }
}

}  // namespace rln
