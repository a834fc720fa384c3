#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace specloc::rng {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used as the mixing step for
/// deriving named substreams from a master seed, so that any tuple
/// (seed, tag, id...) addresses a reproducible stream independently of
/// execution order.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a hash of a stream tag such as "graph" or "rewire".
constexpr std::uint64_t tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive a substream key from a master seed and any number of integer ids.
template <typename... Ids>
constexpr std::uint64_t substream(std::uint64_t seed, Ids... ids) {
    std::uint64_t k = splitmix64(seed);
    ((k = splitmix64(k ^ splitmix64(static_cast<std::uint64_t>(ids)))), ...);
    return k;
}

/// Map a 64-bit word to a double in [0, 1).
constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// One-shot uniform draw in [0, 1) addressed by a stream tuple.
template <typename... Ids>
constexpr double unit_at(std::uint64_t seed, Ids... ids) {
    return to_unit(substream(seed, ids...));
}

/// Sequential engine seeded from a substream key.
template <typename... Ids>
std::mt19937_64 engine(std::uint64_t seed, Ids... ids) {
    return std::mt19937_64(substream(seed, ids...));
}

} // namespace specloc::rng
