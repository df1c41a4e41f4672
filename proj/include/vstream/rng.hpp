// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace vstream
{
    /// One stream per episode or Monte-Carlo path.
    using Rng = std::mt19937_64;

    /// Uniform double in [0, 1) from the top 53 bits; identical on every
    /// standard library, unlike std::uniform_real_distribution.
    inline double uniform01(Rng &rng) noexcept
    {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n) by rejection, portable across libraries.
    inline std::size_t uniform_index(Rng &rng, std::size_t n) noexcept
    {
        if (n <= 1)
        {
            return 0;
        }
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = rng();
        while (x >= limit)
        {
            x = rng();
        }
        return static_cast<std::size_t>(x % bound);
    }

    inline bool bernoulli(Rng &rng, double p) noexcept { return uniform01(rng) < p; }

    inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    /// FNV-1a, used to fold names (policy, experiment) into seeds.
    inline constexpr std::uint64_t hash_name(std::string_view s) noexcept
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : s)
        {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    /// Order-sensitive seed combination.
    inline constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept
    {
        std::uint64_t h = 0x5EED5EED5EED5EEDULL;
        for (std::uint64_t v : parts)
        {
            h = splitmix64(h ^ splitmix64(v));
        }
        return h;
    }

} // namespace vstream
