// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/risk.hpp"

#include <cmath>

namespace sgdlab {

namespace {

bool square_on_linear(const DataDistribution& dist, const LossModel& loss) {
    return dist.kind() == DistributionKind::LinearGaussian &&
           loss.kind() == LossKind::Square;
}

}  // namespace

RiskEstimate expected_risk(const DataDistribution& dist, const LossModel& loss,
                           const Vector& f, const RiskOptions& opts) {
    require_dimension(f, dist.dimension());
    if (square_on_linear(dist, loss)) {
        const double s = dist.noise_sigma();
        return {(f - dist.w_star()).squaredNorm() + s * s, 0.0, 0, true};
    }
    if (dist.kind() == DistributionKind::CustomEmpirical) {
        double sum = 0.0;
        for (const Sample& z : dist.pool()) sum += value(loss, f, z);
        return {sum / static_cast<double>(dist.pool().size()), 0.0, 0, true};
    }
    if (opts.mc_draws < 2)
        throw Error("expected_risk: no closed form for " + to_string(loss.kind()) +
                    " loss on " + to_string(dist.kind()) +
                    " data and no Monte Carlo budget configured");

    const StreamKey key{opts.seed, streams::kRisk};
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < opts.mc_draws; ++i) {
        const double v = value(loss, f, dist.draw(key, i));
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(opts.mc_draws);
    return {mean, std::sqrt(m2 / (n - 1.0) / n), opts.mc_draws, false};
}

double empirical_risk(const LossModel& loss, const Vector& f, const Dataset& data) {
    if (data.empty()) throw InvalidArgument("empirical_risk: dataset is empty");
    double sum = 0.0;
    for (const Sample& z : data.samples) sum += value(loss, f, z);
    return sum / static_cast<double>(data.size());
}

GradientEstimate expected_gradient(const DataDistribution& dist, const LossModel& loss,
                                   const Vector& f, const RiskOptions& opts) {
    require_dimension(f, dist.dimension());
    const Eigen::Index p = f.size();
    if (square_on_linear(dist, loss))
        return {2.0 * (f - dist.w_star()), Vector::Zero(p), 0, true};
    if (dist.kind() == DistributionKind::CustomEmpirical) {
        Vector sum = Vector::Zero(p);
        for (const Sample& z : dist.pool()) sum += subgradient(loss, f, z);
        return {sum / static_cast<double>(dist.pool().size()), Vector::Zero(p), 0, true};
    }
    if (opts.mc_draws < 2)
        throw Error("expected_gradient: no closed form and no Monte Carlo budget configured");

    const StreamKey key{opts.seed, streams::kGradient};
    Vector mean = Vector::Zero(p), m2 = Vector::Zero(p);
    for (std::uint64_t i = 0; i < opts.mc_draws; ++i) {
        const Vector g = subgradient(loss, f, dist.draw(key, i));
        const Vector delta = g - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta.cwiseProduct(g - mean);
    }
    const double n = static_cast<double>(opts.mc_draws);
    return {mean, (m2 / (n - 1.0) / n).cwiseSqrt(), opts.mc_draws, false};
}

Vector true_minimizer(const DataDistribution& dist, const LossModel& loss,
                      const ConvexSet& set) {
    require_dimension(dist.w_star(), set.dimension());
    if (!square_on_linear(dist, loss))
        throw NoAnalyticMinimizer("no analytic minimizer for " + to_string(loss.kind()) +
                                  " loss on " + to_string(dist.kind()) +
                                  " data; use erm_solve on a large dataset");
    return project(set, dist.w_star());
}

}  // namespace sgdlab
