// SPDX-License-Identifier: Apache-2.0
//
// Expected and empirical risk, and the constrained minimizer f_K.
#pragma once

#include <cstdint>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/losses.hpp"

namespace sgdlab {

struct RiskOptions {
    std::uint64_t mc_draws = 100000;  // 0 disables the Monte Carlo fallback
    std::uint64_t seed = 0;
};

struct RiskEstimate {
    double value = 0.0;
    double std_error = 0.0;       // 0 when exact
    std::uint64_t samples = 0;    // 0 when exact
    bool exact = false;
};

/// I(f) = E_z V(f, z). Closed form for square loss on linear-gaussian data
/// and for any loss on a custom-empirical pool; Monte Carlo otherwise.
RiskEstimate expected_risk(const DataDistribution& dist, const LossModel& loss,
                           const Vector& f, const RiskOptions& opts = {});

/// I_n(f), the mean of V(f, z_i) over the dataset.
double empirical_risk(const LossModel& loss, const Vector& f, const Dataset& data);

struct GradientEstimate {
    Vector mean;
    Vector std_error;
    std::uint64_t samples = 0;
    bool exact = false;
};

/// grad I(f) = E_z grad V(f, z) (subgradient for hinge).
GradientEstimate expected_gradient(const DataDistribution& dist, const LossModel& loss,
                                   const Vector& f, const RiskOptions& opts = {});

/// f_K = argmin_{f in K} I(f). With identity input covariance the square
/// risk is ||f - w*||^2 + sigma^2, so f_K is the projection of w* onto K.
Vector true_minimizer(const DataDistribution& dist, const LossModel& loss,
                      const ConvexSet& set);

}  // namespace sgdlab
