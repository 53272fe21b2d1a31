// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/stability_lab.hpp"

#include <algorithm>
#include <cmath>

namespace sgdlab {

namespace {

class Welford {
public:
    void push(double v) {
        ++n_;
        const double delta = v - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (v - mean_);
    }
    MeanEstimate estimate() const {
        if (n_ < 2) return {mean_, 0.0};
        const double var = m2_ / static_cast<double>(n_ - 1);
        return {mean_, kZ95 * std::sqrt(var / static_cast<double>(n_))};
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

std::vector<std::uint64_t> resolve_checkpoints(const Trajectory& t,
                                               std::span<const std::uint64_t> requested) {
    if (!requested.empty()) return {requested.begin(), requested.end()};
    std::vector<std::uint64_t> out;
    for (std::uint64_t n : t.indices)
        if (n < t.n_steps()) out.push_back(n);
    return out;
}

}  // namespace

MeanEstimate cvon_gap_estimate(const Vector& f_n, double gamma, const LossModel& loss,
                               const ConvexSet& set, const DataDistribution& dist,
                               std::uint64_t m, StreamKey key) {
    if (m < 2) throw InvalidArgument("cvon_gap_estimate: m must be >= 2");
    Welford acc;
    for (std::uint64_t j = 0; j < m; ++j) {
        const Sample z = dist.draw(key, j);
        const Vector f_next = sgd_step(f_n, z, gamma, loss, set).f_next;
        acc.push(value(loss, f_n, z) - value(loss, f_next, z));
    }
    return acc.estimate();
}

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t first, std::uint64_t last,
                                                 std::size_t count) {
    if (first == 0 || last < first) throw InvalidArgument("geometric_checkpoints: need 0 < first <= last");
    std::vector<std::uint64_t> out;
    if (count == 0) return out;
    if (count == 1) return {first};
    const double ratio = std::log(static_cast<double>(last) / static_cast<double>(first)) /
                         static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(static_cast<std::uint64_t>(
            std::llround(static_cast<double>(first) * std::exp(ratio * static_cast<double>(i)))));
    out.back() = last;
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

StabilitySeries cvon_profile(const Trajectory& t, const DataDistribution& dist,
                             const LossModel& loss, const ConvexSet& set,
                             std::uint64_t m, std::uint64_t seed,
                             std::span<const std::uint64_t> checkpoints) {
    const auto points = resolve_checkpoints(t, checkpoints);
    StabilitySeries s;
    s.m_samples = m;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::uint64_t n = points[i];
        const double gamma = t.schedule.gamma(n);
        const StreamKey key{seed, streams::kStability + static_cast<std::uint32_t>(i)};
        const MeanEstimate est = cvon_gap_estimate(t.iterate_at(n), gamma, loss, set, dist, m, key);
        s.step_indices.push_back(n);
        s.gamma.push_back(gamma);
        s.beta_hat.push_back(est.mean);
        s.ci_halfwidth.push_back(est.ci_halfwidth);
    }
    return s;
}

MeanEstimate pooled_gap(const StabilitySeries& series) {
    if (series.size() == 0) throw InsufficientData("pooled_gap: empty series");
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += series.beta_hat[i];
        sq += series.ci_halfwidth[i] * series.ci_halfwidth[i];
    }
    const double k = static_cast<double>(series.size());
    return {sum / k, std::sqrt(sq) / k};
}

RateFit fit_rate(const StabilitySeries& series) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.beta_hat[i] > series.ci_halfwidth[i] && series.gamma[i] > 0.0) {
            xs.push_back(std::log(series.gamma[i]));
            ys.push_back(std::log(series.beta_hat[i]));
        }
    }
    if (xs.size() < 5)
        throw InsufficientData("fit_rate: " + std::to_string(xs.size()) +
                               " usable points (need >= 5 with interval excluding 0)");
    const double k = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0, log_ratio = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
        log_ratio += ys[i] - xs[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw InsufficientData("fit_rate: all usable gamma values coincide");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.c_hat = std::exp(log_ratio / k);
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.used_points = xs.size();
    return fit;
}

TaylorTerms taylor_decomposition(const Vector& f, const Sample& z, double gamma,
                                 const LossModel& loss) {
    if (!loss.twice_differentiable())
        throw InvalidArgument("taylor_decomposition needs a twice-differentiable loss");
    const Vector g = gradient(loss, f, z);
    const Vector f_next = f - gamma * g;
    TaylorTerms t;
    t.first_term = gamma * g.squaredNorm();
    t.second_term = 0.5 * gamma * gamma * hessian_quadratic_form(loss, f, z, g, g);
    t.exact_diff = value(loss, f, z) - value(loss, f_next, z);
    t.residual = t.exact_diff - (t.first_term - t.second_term);
    return t;
}

std::string to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::Satisfied: return "satisfied";
        case BoundStatus::Violated: return "violated";
        case BoundStatus::Skipped: return "skipped";
    }
    return "unknown";
}

BoundCheckSummary summarize(std::span<const BoundCheckRow> rows) {
    BoundCheckSummary s;
    for (const auto& r : rows) {
        switch (r.status) {
            case BoundStatus::Satisfied: ++s.satisfied; break;
            case BoundStatus::Violated: ++s.violated; break;
            case BoundStatus::Skipped: ++s.skipped; break;
        }
    }
    return s;
}

MeanEstimate gradient_second_moment(const Vector& f, const LossModel& loss,
                                    const DataDistribution& dist, std::uint64_t m,
                                    StreamKey key) {
    if (m < 2) throw InvalidArgument("gradient_second_moment: m must be >= 2");
    Welford acc;
    for (std::uint64_t j = 0; j < m; ++j)
        acc.push(subgradient(loss, f, dist.draw(key, j)).squaredNorm());
    return acc.estimate();
}

namespace {

BoundStatus judge(const MeanEstimate& lhs, double rhs) {
    return lhs.mean - lhs.ci_halfwidth <= rhs ? BoundStatus::Satisfied : BoundStatus::Violated;
}

}  // namespace

std::vector<BoundCheckRow> converse_bound_check(const Trajectory& t,
                                                const DataDistribution& dist,
                                                const LossModel& loss, double c_hat,
                                                double hessian_bound, std::uint64_t m,
                                                std::uint64_t seed,
                                                std::span<const std::uint64_t> checkpoints) {
    const auto points = resolve_checkpoints(t, checkpoints);
    std::vector<BoundCheckRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        BoundCheckRow row;
        row.n = points[i];
        row.gamma = t.schedule.gamma(row.n);
        const double denom = row.gamma - 0.5 * hessian_bound * row.gamma * row.gamma;
        if (!(denom > 0.0)) {
            row.status = BoundStatus::Skipped;
            row.note = "precondition gamma_n > (M/2) gamma_n^2 fails";
            rows.push_back(row);
            continue;
        }
        row.rhs = c_hat * row.gamma / denom;
        const StreamKey key{seed, streams::kConverse + static_cast<std::uint32_t>(i)};
        const MeanEstimate lhs = gradient_second_moment(t.iterate_at(row.n), loss, dist, m, key);
        row.lhs_mean = lhs.mean;
        row.lhs_ci = lhs.ci_halfwidth;
        row.status = judge(lhs, row.rhs);
        rows.push_back(row);
    }
    return rows;
}

std::vector<BoundCheckRow> grad_growth_check(const Trajectory& t,
                                             const DataDistribution& dist,
                                             const LossModel& loss, const Vector& f_k,
                                             double growth_constant, std::uint64_t m,
                                             std::uint64_t seed,
                                             std::span<const std::uint64_t> checkpoints) {
    const auto points = resolve_checkpoints(t, checkpoints);
    std::vector<BoundCheckRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        BoundCheckRow row;
        row.n = points[i];
        row.gamma = t.schedule.gamma(row.n);
        const Vector& f = t.iterate_at(row.n);
        row.rhs = growth_constant * (1.0 + (f - f_k).squaredNorm());
        const StreamKey key{seed, streams::kGrowth + static_cast<std::uint32_t>(i)};
        const MeanEstimate lhs = gradient_second_moment(f, loss, dist, m, key);
        row.lhs_mean = lhs.mean;
        row.lhs_ci = lhs.ci_halfwidth;
        row.status = judge(lhs, row.rhs);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sgdlab
