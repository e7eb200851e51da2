#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace heatcast::rng {

/// SplitMix64 mixing step.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a hash of a stage label.
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Every random stream in the pipeline is seeded as
/// splitmix64(master ^ fnv1a(stage)), so one config seed determines
/// every stage deterministically.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
    return splitmix64(master ^ fnv1a(stage));
}

/// Per-index substream (e.g. one stream per forest tree).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index) {
    return splitmix64(derive_seed(master, stage) ^ splitmix64(index + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64{seed}; }

}  // namespace heatcast::rng

namespace heatcast {
using rng::derive_seed;
using rng::make_engine;
}  // namespace heatcast
