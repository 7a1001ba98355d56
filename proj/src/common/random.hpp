#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace part {

// std::uniform_int_distribution is implementation-defined, so seeded draws go
// through these helpers (mt19937_64 output is fixed by the standard).
inline std::size_t uniform_index(std::mt19937_64& engine, std::size_t n)
{
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % n + 1) % n;
    std::uint64_t x = 0;
    do {
        x = engine();
    } while (x > limit);
    return static_cast<std::size_t>(x % n);
}

inline std::size_t seeded_index(std::uint64_t seed, std::size_t n)
{
    std::mt19937_64 engine(seed);
    return uniform_index(engine, n);
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& engine)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        using std::swap;
        swap(items[i - 1], items[uniform_index(engine, i)]);
    }
}

inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace part
