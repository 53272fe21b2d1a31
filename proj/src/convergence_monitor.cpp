// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/convergence_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sgdlab {

ExcessRisk excess_risk(const DataDistribution& dist, const LossModel& loss, const Vector& f,
                       const Vector& f_k, const RiskOptions& opts) {
    require_dimension(f, dist.dimension());
    require_dimension(f_k, dist.dimension());
    const bool closed = (dist.kind() == DistributionKind::LinearGaussian &&
                         loss.kind() == LossKind::Square) ||
                        dist.kind() == DistributionKind::CustomEmpirical;
    if (closed) {
        const double v = expected_risk(dist, loss, f, opts).value -
                         expected_risk(dist, loss, f_k, opts).value;
        return {v, 0.0, true, false};
    }
    if (opts.mc_draws < 2)
        throw Error("excess_risk: no closed form and no Monte Carlo budget configured");
    const StreamKey key{opts.seed, streams::kRisk};
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < opts.mc_draws; ++i) {
        const Sample z = dist.draw(key, i);
        const double d = value(loss, f, z) - value(loss, f_k, z);
        const double delta = d - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (d - mean);
    }
    const double n = static_cast<double>(opts.mc_draws);
    return {mean, std::sqrt(m2 / (n - 1.0) / n), false, mean < 0.0};
}

double norm_error(const Vector& f, const Vector& f_k) {
    require_dimension(f, f_k.size());
    return (f - f_k).norm();
}

double generalization_gap(const Vector& f, const Dataset& data, const DataDistribution& dist,
                          const LossModel& loss, const RiskOptions& opts) {
    return std::abs(empirical_risk(loss, f, data) - expected_risk(dist, loss, f, opts).value);
}

std::vector<ConsistencyPoint> consistency_curve(std::span<const Trajectory> runs,
                                                const DataDistribution& dist,
                                                const LossModel& loss, const Vector& f_k,
                                                double epsilon,
                                                std::span<const std::uint64_t> checkpoints,
                                                const RiskOptions& opts) {
    if (runs.size() < 10)
        throw InsufficientData("consistency_curve needs at least 10 replicate runs");
    for (const Trajectory& t : runs)
        if (t.indices != runs.front().indices)
            throw InvalidArgument("consistency_curve: replicate checkpoints do not match");
    std::vector<std::uint64_t> points(checkpoints.begin(), checkpoints.end());
    if (points.empty()) points = runs.front().indices;

    std::vector<ConsistencyPoint> curve;
    curve.reserve(points.size());
    for (std::uint64_t n : points) {
        ConsistencyPoint pt{n, 0, runs.size(), 0.0};
        for (const Trajectory& t : runs)
            if (excess_risk(dist, loss, t.iterate_at(n), f_k, opts).value > epsilon)
                ++pt.exceeding;
        pt.fraction = static_cast<double>(pt.exceeding) / static_cast<double>(pt.total);
        curve.push_back(pt);
    }
    return curve;
}

void MonitorSeries::validate() const {
    const std::size_t n = V.size();
    if (beta.size() != n || chi.size() != n || eta.size() != n)
        throw InvalidArgument("MonitorSeries: sequences differ in length");
    for (const auto* seq : {&V, &beta, &chi, &eta})
        for (double v : *seq)
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidArgument("MonitorSeries: entries must be finite and nonnegative");
}

SgdMonitorRecorder::SgdMonitorRecorder(const DataDistribution& dist, const LossModel& loss,
                                       Vector f_k, StepSchedule schedule, double c_hat,
                                       double hessian_bound, int replicate_id)
    : dist_(&dist),
      loss_(loss),
      f_k_(std::move(f_k)),
      schedule_(schedule),
      c_hat_(c_hat),
      hessian_bound_(hessian_bound) {
    series_.replicate_id = replicate_id;
    // Fails fast for pairs without a closed-form risk gradient.
    (void)expected_gradient(*dist_, loss_, f_k_, RiskOptions{0, 0});
}

IterateObserver SgdMonitorRecorder::observer() {
    return [this](std::uint64_t n, const Vector& f) { observe(n, f); };
}

void SgdMonitorRecorder::observe(std::uint64_t n, const Vector& f) {
    const double gamma = schedule_.gamma(n);
    const Vector err = f - f_k_;
    const Vector grad_risk = expected_gradient(*dist_, loss_, f, RiskOptions{0, 0}).mean;
    const double denom = gamma - 0.5 * hessian_bound_ * gamma * gamma;

    series_.V.push_back(err.squaredNorm());
    series_.beta.push_back(0.0);
    series_.eta.push_back(std::max(0.0, 2.0 * gamma * err.dot(grad_risk)));
    if (denom > 0.0) {
        series_.chi.push_back(gamma * gamma * c_hat_ * gamma / denom);
        if (!seen_valid_) {
            seen_valid_ = true;
            series_.valid_from = static_cast<std::size_t>(n);
        }
    } else {
        series_.chi.push_back(0.0);
        series_.valid_from = static_cast<std::size_t>(n) + 1;
    }
}

namespace {

struct BinStats {
    double mean = 0.0;
    double se = 0.0;
};

// Splits replicate values into `bins` groups by the conditioning key and
// returns mean/SE of the response in each group.
std::vector<BinStats> binned_means(std::vector<std::pair<double, double>> key_response,
                                   std::size_t bins) {
    std::sort(key_response.begin(), key_response.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t r = key_response.size();
    std::vector<BinStats> out;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t lo = b * r / bins, hi = (b + 1) * r / bins;
        if (hi <= lo) continue;
        const double k = static_cast<double>(hi - lo);
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += key_response[i].second;
        mean /= k;
        double ss = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double d = key_response[i].second - mean;
            ss += d * d;
        }
        const double se = hi - lo > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
        out.push_back({mean, se});
    }
    return out;
}

std::size_t bin_count(std::size_t replicates, const MonitorOptions& opts) {
    const std::size_t by_size = replicates / std::max<std::size_t>(1, opts.min_per_bin);
    return std::clamp<std::size_t>(by_size, 1, std::max<std::size_t>(1, opts.bins));
}

void require_consistent(std::span<const MonitorSeries> series) {
    if (series.empty()) throw InsufficientData("monitor: no series given");
    for (const MonitorSeries& s : series) {
        s.validate();
        if (s.size() != series.front().size())
            throw InvalidArgument("monitor: replicate series differ in length");
    }
    if (series.front().size() < 2) throw InsufficientData("monitor: series too short");
}

// Violation rule shared by the recursion and supermartingale tests.
template <class Response>
void run_conditional_test(std::span<const MonitorSeries> series,
                          const std::vector<std::size_t>& points, const MonitorOptions& opts,
                          bool deterministic, Response&& response, std::size_t& violations,
                          std::size_t& tested, double& max_excess) {
    for (std::size_t n : points) {
        std::vector<std::pair<double, double>> kr;
        kr.reserve(series.size());
        for (std::size_t r = 0; r < series.size(); ++r) kr.push_back(response(r, n));
        if (deterministic) {
            for (const auto& [scale, excess] : kr) {
                ++tested;
                max_excess = std::max(max_excess, excess);
                if (excess > opts.abs_tol * (1.0 + std::abs(scale))) ++violations;
            }
            continue;
        }
        for (const auto& [scale, excess] : kr) max_excess = std::max(max_excess, excess);
        for (const BinStats& b : binned_means(std::move(kr), bin_count(series.size(), opts))) {
            ++tested;
            if (b.mean > opts.z * b.se + opts.abs_tol) ++violations;
        }
    }
}

}  // namespace

SummabilityReport classify_summability(std::span<const double> seq, const MonitorOptions& opts) {
    SummabilityReport rep;
    const std::size_t n = seq.size();
    if (n == 0) {
        rep.summable = true;
        return rep;
    }
    const std::size_t start = n / 10;
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < start; ++i) head += seq[i];
    for (std::size_t i = start; i < n; ++i) tail += seq[i];
    rep.partial_sum = head + tail;
    rep.tail_increment_ratio = rep.partial_sum > 0.0 ? tail / rep.partial_sum : 0.0;
    rep.summable = rep.tail_increment_ratio < opts.summable_ratio;

    // log a_k against log k over the last decade.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
    for (std::size_t i = std::max<std::size_t>(start, 1); i < n; ++i) {
        if (seq[i] <= 0.0) continue;
        const double x = std::log(static_cast<double>(i)), y = std::log(seq[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y; k += 1;
    }
    const double denom = k * sxx - sx * sx;
    if (k >= 2 && denom > 0.0) rep.decay_exponent = -(k * sxy - sx * sy) / denom;
    return rep;
}

std::vector<std::size_t> monitor_test_points(std::span<const MonitorSeries> series,
                                             const MonitorOptions& opts) {
    std::size_t start = static_cast<std::size_t>(opts.burn_in);
    for (const MonitorSeries& s : series) start = std::max(start, s.valid_from);
    const std::size_t last = series.front().size() - 1;  // n + 1 must exist
    std::vector<std::size_t> pts;
    if (start >= last) return pts;
    const std::size_t available = last - start;
    if (available <= opts.max_test_points) {
        for (std::size_t n = start; n < last; ++n) pts.push_back(n);
        return pts;
    }
    if (opts.max_test_points == 0) return pts;
    if (opts.max_test_points == 1) return {start};
    const double lo = std::log(static_cast<double>(start + 1));
    const double hi = std::log(static_cast<double>(last));
    for (std::size_t i = 0; i < opts.max_test_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(opts.max_test_points - 1);
        auto n = static_cast<std::size_t>(std::llround(std::exp(lo + t * (hi - lo)))) - 1;
        n = std::clamp(n, start, last - 1);
        pts.push_back(n);
    }
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

RobbinsSiegmundReport robbins_siegmund_check(std::span<const MonitorSeries> series,
                                             const MonitorOptions& opts) {
    require_consistent(series);
    RobbinsSiegmundReport rep;
    rep.deterministic_mode = series.size() < opts.min_replicates;
    if (rep.deterministic_mode)
        rep.notice = "fewer than " + std::to_string(opts.min_replicates) +
                     " replicates: recursion checked pointwise per series";

    const auto points = monitor_test_points(series, opts);
    rep.max_recursion_excess = -std::numeric_limits<double>::infinity();
    run_conditional_test(
        series, points, opts, rep.deterministic_mode,
        [&](std::size_t r, std::size_t n) {
            const MonitorSeries& s = series[r];
            const double rhs = s.V[n] * (1.0 + s.beta[n]) + s.chi[n] - s.eta[n];
            return std::pair{s.V[n], s.V[n + 1] - rhs};
        },
        rep.recursion_violations, rep.tested_points, rep.max_recursion_excess);
    if (points.empty()) rep.max_recursion_excess = 0.0;

    rep.beta_summable = rep.chi_summable = rep.eta_series_bounded = true;
    std::size_t converged = 0;
    auto worse = [](const SummabilityReport& a, const SummabilityReport& b) {
        return a.tail_increment_ratio >= b.tail_increment_ratio ? a : b;
    };
    for (const MonitorSeries& s : series) {
        const auto b = classify_summability(s.beta, opts);
        const auto c = classify_summability(s.chi, opts);
        const auto e = classify_summability(s.eta, opts);
        rep.beta = worse(rep.beta, b);
        rep.chi = worse(rep.chi, c);
        rep.eta = worse(rep.eta, e);
        rep.beta_summable = rep.beta_summable && b.summable;
        rep.chi_summable = rep.chi_summable && c.summable;
        rep.eta_series_bounded = rep.eta_series_bounded && e.summable;

        const std::size_t n = s.size();
        const std::size_t window = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(opts.tail_fraction * static_cast<double>(n))));
        const auto first = s.V.end() - static_cast<std::ptrdiff_t>(std::min(window, n));
        const auto [mn, mx] = std::minmax_element(first, s.V.end());
        if (*mx - *mn < opts.converge_tol * (1.0 + s.V.front())) ++converged;
    }
    rep.v_converged_fraction = static_cast<double>(converged) / static_cast<double>(series.size());
    rep.V_converges = converged == series.size();
    return rep;
}

std::vector<double> compensated_sequence(const MonitorSeries& s) {
    std::vector<double> y(s.size());
    double pi = 1.0;          // pi_n
    double compensator = 0.0;  // sum_{k<n} (eta_k - chi_k) / pi_{k+1}
    for (std::size_t n = 0; n < s.size(); ++n) {
        y[n] = s.V[n] / pi + compensator;
        const double pi_next = pi * (1.0 + s.beta[n]);
        compensator += (s.eta[n] - s.chi[n]) / pi_next;
        pi = pi_next;
    }
    return y;
}

SupermartingaleReport supermartingale_test(std::span<const MonitorSeries> series,
                                           const MonitorOptions& opts) {
    require_consistent(series);
    SupermartingaleReport rep;
    rep.deterministic_mode = series.size() < opts.min_replicates;
    std::vector<std::vector<double>> ys;
    ys.reserve(series.size());
    for (const MonitorSeries& s : series) ys.push_back(compensated_sequence(s));

    double max_excess = 0.0;
    run_conditional_test(
        series, monitor_test_points(series, opts), opts, rep.deterministic_mode,
        [&](std::size_t r, std::size_t n) {
            return std::pair{ys[r][n], ys[r][n + 1] - ys[r][n]};
        },
        rep.violations, rep.tested_points, max_excess);
    return rep;
}

}  // namespace sgdlab
