// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgdlab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53 random bits mapped to the centre of one of 2^53 cells, never 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::array<double, 2> uniform_pair(StreamKey key, std::uint64_t index,
                                   std::uint32_t block) noexcept {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(index),
                            static_cast<std::uint32_t>(index >> 32), block,
                            key.stream};
    const PhiloxKey k{static_cast<std::uint32_t>(key.seed),
                      static_cast<std::uint32_t>(key.seed >> 32)};
    const PhiloxCounter r = philox4x32_10(ctr, k);
    return {to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3])};
}

void fill_normals(StreamKey key, std::uint64_t index, std::uint32_t first_block,
                  std::span<double> out) noexcept {
    std::uint32_t block = first_block;
    for (std::size_t i = 0; i < out.size(); i += 2, ++block) {
        const auto [u1, u2] = uniform_pair(key, index, block);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i] = radius * std::cos(angle);
        if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
    }
}

}  // namespace sgdlab
