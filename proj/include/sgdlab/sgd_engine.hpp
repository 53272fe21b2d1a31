// SPDX-License-Identifier: Apache-2.0
//
// Projected stochastic gradient descent
//
//     f_{n+1} = Pi_K(f_n - gamma_n grad V(f_n, z_n)),   f_0 = 0,
//
// with step sizes gamma_n = a / (b + n + 1)^alpha, and a batch projected
// gradient solver for empirical risk minimization.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/losses.hpp"

namespace sgdlab {

class StepSchedule {
public:
    /// alpha = 0 gives a constant step, useful as a negative control.
    StepSchedule(double a = 0.5, double b = 1.0, double alpha = 1.0);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double alpha() const noexcept { return alpha_; }

    double gamma(std::uint64_t n) const noexcept;

private:
    double a_, b_, alpha_;
};

struct RobbinsMonroReport {
    bool divergent_sum = false;      // sum gamma_n = inf  <=>  alpha <= 1
    bool convergent_sq_sum = false;  // sum gamma_n^2 < inf  <=>  alpha > 1/2
    bool pass = false;
};

RobbinsMonroReport robbins_monro_check(const StepSchedule& s) noexcept;

struct StepResult {
    Vector f_next;
    bool projection_was_active = false;
};

/// One projected step. Uses the subgradient for non-smooth losses.
StepResult sgd_step(const Vector& f, const Sample& z, double gamma,
                    const LossModel& loss, const ConvexSet& set);

/// Tolerance below which a pre-projection point counts as already in K.
inline constexpr double kProjectionTol = 1e-12;

struct RunSnapshot {
    std::string distribution;
    std::string loss;
    std::string constraint;
    Eigen::Index dimension = 0;
};

class Trajectory {
public:
    std::vector<std::uint64_t> indices;  // recorded n, ascending, includes 0 and n_steps
    std::vector<Vector> iterates;        // f_n for each recorded n
    std::vector<double> step_losses;     // V(f_k, z_k), k = 0..n_steps-1
    std::vector<std::uint8_t> projection_active;  // per step
    StepSchedule schedule;
    std::uint64_t seed = 0;
    RunSnapshot snapshot;

    std::uint64_t n_steps() const noexcept { return step_losses.size(); }
    bool has_iterate(std::uint64_t n) const;
    /// Throws InvalidArgument if n was not recorded.
    const Vector& iterate_at(std::uint64_t n) const;
    const Vector& final_iterate() const { return iterates.back(); }
};

/// Called with (n, f_n) for every n = 0..n_steps.
using IterateObserver = std::function<void(std::uint64_t, const Vector&)>;

struct RunOptions {
    /// >0: record every stride-th iterate. 0: every iterate up to
    /// dense_until, then `per_decade` geometrically spaced checkpoints.
    std::uint64_t record_stride = 0;
    std::uint64_t dense_until = 10000;
    int per_decade = 20;
    std::vector<std::uint64_t> extra_indices;
    std::optional<Vector> initial;  // defaults to f_0 = 0
    IterateObserver observer;
};

/// Recorded indices for a run of n_steps under `opts` (sorted, unique).
std::vector<std::uint64_t> record_indices(std::uint64_t n_steps, const RunOptions& opts);

/// Step k consumes draw(dist, seed, k). Throws DivergenceError when an
/// iterate is non-finite or ||f|| > 1e6 (1 + diameter of K).
Trajectory run_sgd(const DataDistribution& dist, const LossModel& loss,
                   const ConvexSet& set, const StepSchedule& schedule,
                   std::uint64_t n_steps, std::uint64_t seed,
                   const RunOptions& opts = {});

/// Smallest N such that the projection is inactive at every step > N;
/// nullopt if the projection was active at the final step.
std::optional<std::uint64_t> projection_inactivity_index(const Trajectory& t);

/// Fraction of steps in [from, n_steps) where the projection was active.
double projection_activity_fraction(const Trajectory& t, std::uint64_t from);

struct ErmResult {
    Vector f;
    double objective = 0.0;
    bool converged = false;  // false: max_iters hit, best iterate returned
    int iterations = 0;
    std::vector<double> objective_history;
};

/// Batch projected gradient descent with Armijo backtracking from f = 0.
/// Stops when ||f - Pi_K(f - grad I_n(f))|| < tol.
ErmResult erm_solve(const Dataset& data, const LossModel& loss, const ConvexSet& set,
                    double tol = 1e-8, int max_iters = 10000);

}  // namespace sgdlab
