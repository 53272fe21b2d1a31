// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimation of the CV_on stability gap
//
//     E_{z_n}[ V(f_n, z_n) - V(f_{n+1}, z_n) | S_n ],
//
// obtained by freezing f_n and drawing fresh z on a stream disjoint from the
// trajectory's data stream, plus the checks built on it.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/losses.hpp"
#include "sgdlab/sgd_engine.hpp"

namespace sgdlab {

/// z-value for the two-sided 95% normal interval.
inline constexpr double kZ95 = 1.959963984540054;

struct MeanEstimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;  // 95% normal approximation
};

MeanEstimate cvon_gap_estimate(const Vector& f_n, double gamma, const LossModel& loss,
                               const ConvexSet& set, const DataDistribution& dist,
                               std::uint64_t m, StreamKey key);

struct StabilitySeries {
    std::vector<std::uint64_t> step_indices;
    std::vector<double> gamma;
    std::vector<double> beta_hat;
    std::vector<double> ci_halfwidth;
    std::uint64_t m_samples = 0;

    std::size_t size() const noexcept { return step_indices.size(); }
};

/// `count` geometrically spaced indices in [first, last], rounded and
/// deduplicated.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t first, std::uint64_t last,
                                                 std::size_t count);

/// Gap estimates at each checkpoint; checkpoint i draws from stream
/// kStability + i. Empty `checkpoints` means every recorded index except the last.
StabilitySeries cvon_profile(const Trajectory& t, const DataDistribution& dist,
                             const LossModel& loss, const ConvexSet& set,
                             std::uint64_t m, std::uint64_t seed,
                             std::span<const std::uint64_t> checkpoints = {});

/// Mean of the gap estimates with the quadrature-combined half-width.
MeanEstimate pooled_gap(const StabilitySeries& series);

struct RateFit {
    double slope = 0.0;      // of log beta_hat against log gamma
    double intercept = 0.0;
    double c_hat = 0.0;      // geometric mean of beta_hat / gamma
    double r_squared = 0.0;
    std::size_t used_points = 0;
};

/// Least-squares fit over points whose interval excludes zero (beta_hat > ci).
/// Throws InsufficientData with fewer than 5 such points.
RateFit fit_rate(const StabilitySeries& series);

struct TaylorTerms {
    double first_term = 0.0;   // gamma ||grad V||^2
    double second_term = 0.0;  // gamma^2/2 <grad V, H grad V>, H taken at f
    double exact_diff = 0.0;   // V(f, z) - V(f - gamma grad V, z)
    double residual = 0.0;     // exact_diff - (first_term - second_term)
};

/// Second-order expansion of one unprojected step. Exact for quadratics.
TaylorTerms taylor_decomposition(const Vector& f, const Sample& z, double gamma,
                                 const LossModel& loss);

enum class BoundStatus { Satisfied, Violated, Skipped };

std::string to_string(BoundStatus s);

struct BoundCheckRow {
    std::uint64_t n = 0;
    double gamma = 0.0;
    double lhs_mean = 0.0;  // Monte Carlo E_z ||grad V(f_n, z)||^2
    double lhs_ci = 0.0;
    double rhs = 0.0;
    BoundStatus status = BoundStatus::Skipped;
    std::string note;
};

struct BoundCheckSummary {
    std::size_t satisfied = 0, violated = 0, skipped = 0;
    bool all_usable_satisfied() const noexcept { return violated == 0 && satisfied > 0; }
};

BoundCheckSummary summarize(std::span<const BoundCheckRow> rows);

/// Monte Carlo E_z ||grad V(f, z)||^2 with its 95% half-width.
MeanEstimate gradient_second_moment(const Vector& f, const LossModel& loss,
                                    const DataDistribution& dist, std::uint64_t m,
                                    StreamKey key);

/// E_z||grad V(f_n, z)||^2 <= C gamma_n / (gamma_n - (M/2) gamma_n^2).
/// A row is violated only when the lower end of the 95% interval exceeds
/// the bound; rows with gamma_n <= (M/2) gamma_n^2 are skipped.
std::vector<BoundCheckRow> converse_bound_check(const Trajectory& t,
                                                const DataDistribution& dist,
                                                const LossModel& loss, double c_hat,
                                                double hessian_bound, std::uint64_t m,
                                                std::uint64_t seed,
                                                std::span<const std::uint64_t> checkpoints);

/// E_z||grad V(f_n, z)||^2 <= D (1 + ||f_n - f_K||^2), same violation rule.
std::vector<BoundCheckRow> grad_growth_check(const Trajectory& t,
                                             const DataDistribution& dist,
                                             const LossModel& loss, const Vector& f_k,
                                             double growth_constant, std::uint64_t m,
                                             std::uint64_t seed,
                                             std::span<const std::uint64_t> checkpoints);

}  // namespace sgdlab
