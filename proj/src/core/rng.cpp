// SPDX-License-Identifier: Apache-2.0
#include "selfplan/core/rng.hpp"

#include <cassert>
#include <numeric>

namespace selfplan {

std::uint64_t fnv1a(std::string_view data, std::uint64_t basis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::string_view stream) noexcept {
    // splitmix64 finalizer over the mixed seed
    std::uint64_t z = seed ^ fnv1a(stream);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t Rng::below(std::size_t bound) {
    assert(bound > 0);
    const auto b = static_cast<std::uint64_t>(bound);
    const std::uint64_t threshold = (0 - b) % b;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x < threshold);
    return static_cast<std::size_t>(x % b);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t population, std::size_t count) {
    if (count > population) count = population;
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // partial Fisher-Yates from the front
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(pool[i], pool[i + below(population - i)]);
    }
    pool.resize(count);
    return pool;
}

} // namespace selfplan
