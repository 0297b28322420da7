#pragma once

#include <cstdint>
#include <random>

namespace foodsec {

/// Independent random streams keyed by (master seed, trajectory id, stream tag).
///
/// Each stream's seed is a SplitMix64 hash of its key, so a trajectory's draws never depend on
/// which thread produced it or on how many other trajectories were requested.
enum class StreamTag : std::uint64_t { tfr = 1, e0 = 2, e0_gap = 3 };

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t trajectory_id,
                                    StreamTag tag) noexcept {
    return splitmix64(master ^ splitmix64(trajectory_id ^ splitmix64(static_cast<std::uint64_t>(tag))));
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t trajectory_id,
                                   StreamTag tag) {
    return std::mt19937_64{stream_seed(master, trajectory_id, tag)};
}

} // namespace foodsec
