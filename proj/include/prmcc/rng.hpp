#pragma once

#include <cstdint>
#include <random>

namespace prmcc {

/// Signal roles that get their own random stream inside a trial.
enum class StreamRole : std::uint64_t { input = 1, noise = 2, system = 3 };

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

using RandomStream = std::mt19937_64;

/// Independent stream for (experiment seed, trial, role). The seed is a pure
/// function of the triple, so trials can run in any order or thread.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t trial, StreamRole role)
{
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ trial);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(role));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return RandomStream(seq);
}

}  // namespace prmcc
