#pragma once

#include <cstdint>
#include <random>

namespace hamlearn {

/// The single generator used everywhere; recorded in all output metadata.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent seed for item `index` of stream `stream` under a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

namespace seed_stream {
inline constexpr std::uint64_t train = 0x7472616e;
inline constexpr std::uint64_t validation = 0x76616c69;
inline constexpr std::uint64_t test = 0x74657374;
inline constexpr std::uint64_t weights = 0x77656967;
inline constexpr std::uint64_t bootstrap = 0x626f6f74;
}  // namespace seed_stream

}  // namespace hamlearn
