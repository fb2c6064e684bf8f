#pragma once

#include <cstdint>
#include <random>

namespace gsgp {

/// splitmix64 finalizer. Used to decorrelate user-facing seeds before they
/// reach an engine stream; consecutive seeds would otherwise produce
/// mt19937_64 states that start out visibly correlated.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives the seed for one named stream of a run. Streams with the same
/// base seed are independent; the same (base, stream) pair always yields the
/// same generator.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return splitmix64(base + 0x9e3779b97f4a7c15ull * (stream + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(base, stream));
}

/// Stream ids. Both engines draw their initial population from stream 0 so
/// that runs with equal seeds start from identical generation-0 populations.
inline constexpr std::uint64_t rng_stream_init = 0;
inline constexpr std::uint64_t rng_stream_evolution = 1;

}
