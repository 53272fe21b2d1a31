// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/sgd_engine.hpp"

#include <algorithm>
#include <cmath>

#include "sgdlab/risk.hpp"

namespace sgdlab {

StepSchedule::StepSchedule(double a, double b, double alpha) : a_(a), b_(b), alpha_(alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("schedule: a must be > 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidArgument("schedule: b must be >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw InvalidArgument("schedule: alpha must be >= 0");
}

double StepSchedule::gamma(std::uint64_t n) const noexcept {
    return a_ / std::pow(b_ + static_cast<double>(n) + 1.0, alpha_);
}

RobbinsMonroReport robbins_monro_check(const StepSchedule& s) noexcept {
    RobbinsMonroReport r;
    r.divergent_sum = s.alpha() <= 1.0;
    r.convergent_sq_sum = s.alpha() > 0.5;
    r.pass = r.divergent_sum && r.convergent_sq_sum;
    return r;
}

StepResult sgd_step(const Vector& f, const Sample& z, double gamma,
                    const LossModel& loss, const ConvexSet& set) {
    if (!(gamma > 0.0)) throw InvalidArgument("sgd_step: gamma must be > 0");
    const Vector pre = f - gamma * subgradient(loss, f, z);
    StepResult out{project(set, pre), false};
    out.projection_was_active = (pre - out.f_next).norm() > kProjectionTol;
    return out;
}

bool Trajectory::has_iterate(std::uint64_t n) const {
    return std::binary_search(indices.begin(), indices.end(), n);
}

const Vector& Trajectory::iterate_at(std::uint64_t n) const {
    const auto it = std::lower_bound(indices.begin(), indices.end(), n);
    if (it == indices.end() || *it != n)
        throw InvalidArgument("iterate " + std::to_string(n) + " was not recorded");
    return iterates[static_cast<std::size_t>(it - indices.begin())];
}

std::vector<std::uint64_t> record_indices(std::uint64_t n_steps, const RunOptions& opts) {
    std::vector<std::uint64_t> out{0, n_steps};
    if (opts.record_stride > 0) {
        for (std::uint64_t n = opts.record_stride; n < n_steps; n += opts.record_stride)
            out.push_back(n);
    } else {
        const std::uint64_t dense = std::min(opts.dense_until, n_steps);
        for (std::uint64_t n = 1; n <= dense; ++n) out.push_back(n);
        if (dense < n_steps && opts.per_decade > 0) {
            const double base = static_cast<double>(std::max<std::uint64_t>(dense, 1));
            for (int k = 1;; ++k) {
                const auto n = static_cast<std::uint64_t>(
                    std::llround(base * std::pow(10.0, k / static_cast<double>(opts.per_decade))));
                if (n >= n_steps) break;
                out.push_back(n);
            }
        }
    }
    for (std::uint64_t n : opts.extra_indices)
        if (n <= n_steps) out.push_back(n);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Trajectory run_sgd(const DataDistribution& dist, const LossModel& loss,
                   const ConvexSet& set, const StepSchedule& schedule,
                   std::uint64_t n_steps, std::uint64_t seed, const RunOptions& opts) {
    if (n_steps < 1) throw InvalidArgument("run_sgd: n_steps must be >= 1");
    const Eigen::Index p = dist.dimension();
    if (set.dimension() != p)
        throw DimensionMismatch(static_cast<std::size_t>(p),
                                static_cast<std::size_t>(set.dimension()));

    Trajectory t;
    t.schedule = schedule;
    t.seed = seed;
    t.snapshot = {to_string(dist.kind()), to_string(loss.kind()), set.describe(), p};
    t.indices = record_indices(n_steps, opts);
    t.iterates.reserve(t.indices.size());
    t.step_losses.resize(n_steps);
    t.projection_active.resize(n_steps);

    Vector f = opts.initial ? *opts.initial : Vector::Zero(p);
    require_dimension(f, p);
    const double guard = 1e6 * (1.0 + set.diameter_proxy());
    auto next_record = t.indices.begin();

    for (std::uint64_t k = 0;; ++k) {
        if (opts.observer) opts.observer(k, f);
        if (next_record != t.indices.end() && *next_record == k) {
            t.iterates.push_back(f);
            ++next_record;
        }
        if (k == n_steps) break;

        const Sample z = draw(dist, seed, k);
        t.step_losses[k] = value(loss, f, z);
        StepResult step = sgd_step(f, z, schedule.gamma(k), loss, set);
        t.projection_active[k] = step.projection_was_active ? 1 : 0;
        if (!step.f_next.allFinite())
            throw DivergenceError(k, "non-finite iterate (step size too large?)");
        if (step.f_next.norm() > guard)
            throw DivergenceError(k, "iterate norm exceeded the divergence guard");
        f = std::move(step.f_next);
    }
    return t;
}

std::optional<std::uint64_t> projection_inactivity_index(const Trajectory& t) {
    const auto& active = t.projection_active;
    for (std::size_t k = active.size(); k-- > 0;) {
        if (active[k]) {
            if (k + 1 == active.size()) return std::nullopt;
            return static_cast<std::uint64_t>(k);
        }
    }
    return 0;
}

double projection_activity_fraction(const Trajectory& t, std::uint64_t from) {
    const std::uint64_t n = t.n_steps();
    if (from >= n) return 0.0;
    std::uint64_t count = 0;
    for (std::uint64_t k = from; k < n; ++k) count += t.projection_active[k];
    return static_cast<double>(count) / static_cast<double>(n - from);
}

ErmResult erm_solve(const Dataset& data, const LossModel& loss, const ConvexSet& set,
                    double tol, int max_iters) {
    if (data.empty()) throw InvalidArgument("erm_solve: dataset is empty");
    if (!(tol > 0.0)) throw InvalidArgument("erm_solve: tol must be > 0");
    const Eigen::Index p = set.dimension();

    auto batch_gradient = [&](const Vector& f) {
        Vector g = Vector::Zero(p);
        for (const Sample& z : data.samples) g += subgradient(loss, f, z);
        return Vector(g / static_cast<double>(data.size()));
    };

    ErmResult out;
    Vector f = project(set, Vector::Zero(p));
    double obj = empirical_risk(loss, f, data);
    out.objective_history.push_back(obj);
    double step = 1.0;

    for (int it = 0; it < max_iters; ++it) {
        const Vector g = batch_gradient(f);
        if ((f - project(set, f - g)).norm() < tol) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        for (int halving = 0; halving < 80; ++halving) {
            const Vector cand = project(set, f - step * g);
            const Vector d = cand - f;
            const double cand_obj = empirical_risk(loss, cand, data);
            if (cand_obj <= obj + g.dot(d) + d.squaredNorm() / (2.0 * step)) {
                accepted = cand_obj <= obj;
                if (accepted) {
                    f = cand;
                    obj = cand_obj;
                }
                break;
            }
            step *= 0.5;
        }
        out.iterations = it + 1;
        if (!accepted) break;  // no further decrease representable
        out.objective_history.push_back(obj);
        step = std::min(step * 2.0, 1e6);
    }
    if (!out.converged) {
        const Vector g = batch_gradient(f);
        out.converged = (f - project(set, f - g)).norm() < tol;
    }
    out.f = f;
    out.objective = obj;
    return out;
}

}  // namespace sgdlab
