// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sgdlab/rng.hpp"

using namespace sgdlab;

TEST_SUITE("rng") {

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox4x32-10 known answers") {
    const auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(a == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

    const auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
    CHECK(b == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

    const auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
    CHECK(c == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniforms lie in the open unit interval and are reproducible") {
    const StreamKey key{42, streams::kData};
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto u = uniform_pair(key, static_cast<std::uint64_t>(i), 0);
        CHECK(u[0] > 0.0);
        CHECK(u[0] < 1.0);
        CHECK(u[1] > 0.0);
        CHECK(u[1] < 1.0);
        sum += u[0] + u[1];
    }
    // Mean of 2n uniforms: sd = sqrt(1/12 / 2n).
    CHECK(std::abs(sum / (2.0 * n) - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / (2.0 * n)));
    CHECK(uniform_pair(key, 7, 3) == uniform_pair(key, 7, 3));
}

TEST_CASE("normals have unit variance and streams are distinct") {
    const int n = 50000;
    double s1 = 0.0, s2 = 0.0;
    std::vector<double> buf(4);
    for (int i = 0; i < n; ++i) {
        fill_normals(StreamKey{3, streams::kData}, static_cast<std::uint64_t>(i), 0, buf);
        for (double x : buf) s1 += x, s2 += x * x;
    }
    const double m = s1 / (4.0 * n), var = s2 / (4.0 * n) - m * m;
    CHECK(std::abs(m) < 4.0 / std::sqrt(4.0 * n));
    // Var of the sample variance of N(0,1) is about 2/N.
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / (4.0 * n)));

    std::vector<double> a(2), b(2), c(2);
    fill_normals(StreamKey{3, streams::kData}, 0, 0, a);
    fill_normals(StreamKey{3, streams::kStability}, 0, 0, b);
    fill_normals(StreamKey{4, streams::kData}, 0, 0, c);
    CHECK(a != b);
    CHECK(a != c);
}

}
