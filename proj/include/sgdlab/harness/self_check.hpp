// SPDX-License-Identifier: Apache-2.0
//
// Built-in property suites run by `sgdlab check`.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgdlab::harness {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Gradient finite differences, projection properties (including brute-force
/// comparison in dimension <= 3) and Taylor exactness.
std::vector<CheckResult> run_self_check(std::uint64_t seed = 1);

}  // namespace sgdlab::harness
