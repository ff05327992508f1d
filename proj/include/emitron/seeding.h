#pragma once

#include <cstdint>
#include <string_view>

namespace emitron {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// FNV-1a over the bytes of a string; stable across platforms and runs.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept
{
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001B3ull;
    }
    return hash;
}

// Per-key stream seed. Depends only on (seed, key), never on evaluation order.
constexpr std::uint64_t keyed_seed(std::uint64_t seed, std::string_view key) noexcept
{
    return mix64(seed ^ mix64(fnv1a(key)));
}

constexpr std::uint64_t keyed_seed(std::uint64_t seed, std::uint64_t key) noexcept
{
    return mix64(seed ^ mix64(key + 0x632BE59BD9B4E019ull));
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}
