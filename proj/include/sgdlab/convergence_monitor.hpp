// SPDX-License-Identifier: Apache-2.0
//
// Consistency metrics over replicate runs, and the Robbins-Siegmund recursion
//
//     E[V_{n+1} | F_n] <= V_n (1 + beta_n) + chi_n - eta_n
//
// as an empirical diagnostic. Conditional expectations are approximated by
// binning replicates on the conditioning value; summability of finite
// sequences is a heuristic classification. Neither certifies almost-sure
// convergence.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgdlab/distribution.hpp"
#include "sgdlab/losses.hpp"
#include "sgdlab/risk.hpp"
#include "sgdlab/sgd_engine.hpp"

namespace sgdlab {

struct ExcessRisk {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = false;
    /// Negative value that can only come from Monte Carlo noise.
    bool noise_flag = false;
};

/// I(f) - I(f_K). The Monte Carlo path uses paired draws for both points.
ExcessRisk excess_risk(const DataDistribution& dist, const LossModel& loss, const Vector& f,
                       const Vector& f_k, const RiskOptions& opts = {});

double norm_error(const Vector& f, const Vector& f_k);

/// |I_n(f) - I(f)|.
double generalization_gap(const Vector& f, const Dataset& data, const DataDistribution& dist,
                          const LossModel& loss, const RiskOptions& opts = {});

struct ConsistencyPoint {
    std::uint64_t n = 0;
    std::size_t exceeding = 0;
    std::size_t total = 0;
    double fraction = 0.0;
};

/// Fraction of replicates with excess risk > epsilon at each checkpoint.
/// All runs must share recorded indices; at least 10 runs are required.
/// Empty `checkpoints` means every recorded index.
std::vector<ConsistencyPoint> consistency_curve(std::span<const Trajectory> runs,
                                                const DataDistribution& dist,
                                                const LossModel& loss, const Vector& f_k,
                                                double epsilon,
                                                std::span<const std::uint64_t> checkpoints = {},
                                                const RiskOptions& opts = {});

/// Dense per-step sequences, n = 0..N. Entries before `valid_from` are not
/// tested by the recursion checks.
struct MonitorSeries {
    std::vector<double> V;
    std::vector<double> beta;
    std::vector<double> chi;
    std::vector<double> eta;
    int replicate_id = 0;
    std::size_t valid_from = 0;

    std::size_t size() const noexcept { return V.size(); }
    /// Throws InvalidArgument on length mismatch, negative or non-finite entries.
    void validate() const;
};

/// Builds the SGD decomposition while run_sgd executes:
///   V_n = ||f_n - f_K||^2, beta_n = 0,
///   chi_n = gamma_n^2 C gamma_n / (gamma_n - (M/2) gamma_n^2),
///   eta_n = 2 gamma_n <f_n - f_K, grad I(f_n)>.
/// chi_n is only defined once gamma_n > (M/2) gamma_n^2; earlier steps
/// set chi_n = 0 and are excluded through valid_from.
class SgdMonitorRecorder {
public:
    SgdMonitorRecorder(const DataDistribution& dist, const LossModel& loss, Vector f_k,
                       StepSchedule schedule, double c_hat, double hessian_bound,
                       int replicate_id = 0);

    IterateObserver observer();
    const MonitorSeries& series() const noexcept { return series_; }
    MonitorSeries take() { return std::move(series_); }

private:
    void observe(std::uint64_t n, const Vector& f);

    const DataDistribution* dist_;
    LossModel loss_;
    Vector f_k_;
    StepSchedule schedule_;
    double c_hat_;
    double hessian_bound_;
    bool seen_valid_ = false;
    MonitorSeries series_;
};

struct MonitorOptions {
    std::size_t bins = 10;            // quantile bins on the conditioning value
    std::size_t min_per_bin = 10;     // fewer replicates -> fewer bins
    std::size_t min_replicates = 20;  // below this: deterministic pointwise mode
    double z = 2.0;                   // violation when bin mean > z * SE
    std::size_t max_test_points = 200;
    std::uint64_t burn_in = 0;
    double abs_tol = 1e-12;
    double summable_ratio = 0.01;     // last-decade increment / partial sum
    double tail_fraction = 0.1;       // window for the V_n oscillation test
    double converge_tol = 1e-2;       // oscillation < converge_tol * (1 + V_0)
};

/// Heuristic summability verdict for a finite nonnegative sequence.
struct SummabilityReport {
    double partial_sum = 0.0;
    double tail_increment_ratio = 0.0;  // (S_N - S_{N/10}) / S_N
    double decay_exponent = 0.0;        // q in a_n ~ n^-q over the last decade
    bool summable = false;
};

SummabilityReport classify_summability(std::span<const double> seq,
                                       const MonitorOptions& opts = {});

struct RobbinsSiegmundReport {
    std::size_t recursion_violations = 0;
    std::size_t tested_points = 0;
    double max_recursion_excess = 0.0;  // max of V_{n+1} - RHS_n over tested points
    bool deterministic_mode = false;
    bool beta_summable = false;
    bool chi_summable = false;
    bool V_converges = false;
    bool eta_series_bounded = false;
    double v_converged_fraction = 0.0;
    SummabilityReport beta, chi, eta;  // worst replicate
    std::string notice;

    double violation_rate() const noexcept {
        return tested_points == 0 ? 0.0
                                  : static_cast<double>(recursion_violations) /
                                        static_cast<double>(tested_points);
    }
    bool pass(double max_violation_rate = 0.05) const noexcept {
        return violation_rate() <= max_violation_rate && beta_summable && chi_summable &&
               V_converges && eta_series_bounded;
    }
};

RobbinsSiegmundReport robbins_siegmund_check(std::span<const MonitorSeries> series,
                                             const MonitorOptions& opts = {});

struct SupermartingaleReport {
    std::size_t violations = 0;
    std::size_t tested_points = 0;
    bool deterministic_mode = false;

    double violation_rate() const noexcept {
        return tested_points == 0 ? 0.0
                                  : static_cast<double>(violations) /
                                        static_cast<double>(tested_points);
    }
};

/// Y_n = V_n / pi_n + sum_{k<n} (eta_k - chi_k) / pi_{k+1}, pi_n = prod_{k<n}(1 + beta_k),
/// which reduces to V_n + sum_{k<n} eta_k when beta = chi = 0. Tests
/// E[Y_{n+1} | F_n] <= Y_n by binning on Y_n.
SupermartingaleReport supermartingale_test(std::span<const MonitorSeries> series,
                                           const MonitorOptions& opts = {});

/// The compensated sequence Y_n used by supermartingale_test.
std::vector<double> compensated_sequence(const MonitorSeries& s);

/// Indices n (with n + 1 < size) at which the recursion tests are evaluated.
std::vector<std::size_t> monitor_test_points(std::span<const MonitorSeries> series,
                                             const MonitorOptions& opts);

}  // namespace sgdlab
