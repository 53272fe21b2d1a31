// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers. Every variate is a pure function of
// (seed, stream, index, block), so replicate runs and the fresh-draw streams
// used by the estimators can be regenerated in any order on any thread.
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sgdlab {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Identifies one independent stream of variates.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

namespace streams {
// Stream families are separated by 2^20 so per-checkpoint offsets never collide.
inline constexpr std::uint32_t kData = 0;
inline constexpr std::uint32_t kStability = 1u << 20;
inline constexpr std::uint32_t kConverse = 2u << 20;
inline constexpr std::uint32_t kGrowth = 3u << 20;
inline constexpr std::uint32_t kConstants = 4u << 20;
inline constexpr std::uint32_t kRisk = 5u << 20;
inline constexpr std::uint32_t kGradient = 6u << 20;
inline constexpr std::uint32_t kProbe = 7u << 20;
inline constexpr std::uint32_t kReference = 8u << 20;  // reference-solution samples
}  // namespace streams

/// Two uniforms in the open interval (0, 1) from block `block` of draw `index`.
std::array<double, 2> uniform_pair(StreamKey key, std::uint64_t index,
                                   std::uint32_t block) noexcept;

/// Fills `out` with independent standard normals (Box-Muller), starting at
/// block `first_block`. Consumes ceil(out.size()/2) blocks.
void fill_normals(StreamKey key, std::uint64_t index, std::uint32_t first_block,
                  std::span<double> out) noexcept;

}  // namespace sgdlab
