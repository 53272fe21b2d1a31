// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/harness/self_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/losses.hpp"
#include "sgdlab/stability_lab.hpp"

namespace sgdlab::harness {

namespace {

using Rng = std::mt19937_64;

Vector gaussian(Rng& rng, Eigen::Index p, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vector v(p);
    for (auto& x : v) x = n(rng);
    return v;
}

Sample random_sample(Rng& rng, Eigen::Index p, bool binary) {
    Sample z{gaussian(rng, p), 0.0};
    z.y = binary ? (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0)
                 : std::normal_distribution<double>(0.0, 1.0)(rng);
    return z;
}

std::string num(double v) {
    std::ostringstream o;
    o.precision(3);
    o << std::scientific << v;
    return o.str();
}

std::vector<ConvexSet> sample_sets(Rng& rng, Eigen::Index p) {
    Vector lo = gaussian(rng, p, 0.5), hi = lo;
    for (auto& x : hi) x += 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return {ConvexSet::whole_space(p), ConvexSet::ball(gaussian(rng, p, 0.5), 1.3),
            ConvexSet::box(lo, hi), ConvexSet::simplex(p, 1.5),
            ConvexSet::halfspace(gaussian(rng, p), 0.4)};
}

CheckResult gradient_check(const LossModel& loss, Rng& rng) {
    double worst = 0.0;
    std::size_t probes = 0;
    while (probes < 500) {
        const Vector f = gaussian(rng, 6);
        const Sample z = random_sample(rng, 6, loss.kind() != LossKind::Square);
        // Stay away from the hinge kink so central differences see one branch.
        if (loss.kind() == LossKind::Hinge && std::abs(z.y * f.dot(z.x) - 1.0) < 1e-3) continue;
        worst = std::max(worst, check_gradient_fd(loss, f, z));
        ++probes;
    }
    return {"gradient finite differences (" + to_string(loss.kind()) + ")", worst < 1e-5,
            "max relative error " + num(worst) + " over 500 probes"};
}

CheckResult projection_properties(Rng& rng, Eigen::Index p) {
    double idem = 0, contraction = 0, vi = 0, member = 0;
    for (const auto& set : sample_sets(rng, p)) {
        for (int i = 0; i < 200; ++i) {
            const Vector f = gaussian(rng, p, 2.0), g = gaussian(rng, p, 2.0);
            const Vector pf = project(set, f), pg = project(set, g);
            const Vector k = project(set, gaussian(rng, p, 2.0));
            idem = std::max(idem, (project(set, pf) - pf).norm());
            contraction = std::max(contraction, (pf - pg).norm() - (f - g).norm());
            vi = std::max(vi, (f - pf).dot(k - pf) / (1.0 + (f - pf).norm() * (k - pf).norm()));
            member = std::max(member, distance(set, pf));
        }
    }
    const double tol = 1e-10;
    const bool ok = idem <= tol && contraction <= tol && vi <= tol && member <= tol;
    return {"projection properties (p=" + std::to_string(p) + ")", ok,
            "idempotence " + num(idem) + ", expansion " + num(contraction) + ", variational " +
                num(vi) + ", membership " + num(member)};
}

// Candidate points of K on a lattice of spacing h inside [-R, R]^p, plus a
// lattice on the simplex itself (which has no volume).
std::vector<Vector> lattice_in(const ConvexSet& set, Eigen::Index p, double R, int steps) {
    std::vector<Vector> out;
    if (set.kind() == SetKind::Simplex) {
        const double s = set.as<ConvexSet::Simplex>().scale;
        std::vector<int> idx(static_cast<std::size_t>(p), 0);
        // Compositions of `steps` into p parts.
        auto rec = [&](auto&& self, Eigen::Index d, int left) -> void {
            if (d == p - 1) {
                idx[static_cast<std::size_t>(d)] = left;
                Vector v(p);
                for (Eigen::Index j = 0; j < p; ++j)
                    v[j] = s * idx[static_cast<std::size_t>(j)] / static_cast<double>(steps);
                out.push_back(v);
                return;
            }
            for (int k = 0; k <= left; ++k) {
                idx[static_cast<std::size_t>(d)] = k;
                self(self, d + 1, left - k);
            }
        };
        rec(rec, 0, steps);
        return out;
    }
    const double h = 2.0 * R / steps;
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    while (true) {
        Vector v(p);
        for (Eigen::Index j = 0; j < p; ++j) v[j] = -R + h * idx[static_cast<std::size_t>(j)];
        if (contains(set, v, 0.0)) out.push_back(v);
        Eigen::Index j = 0;
        while (j < p && ++idx[static_cast<std::size_t>(j)] > steps) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == p) break;
    }
    return out;
}

CheckResult projection_brute_force(Rng& rng) {
    double worst_gap = -std::numeric_limits<double>::infinity(), worst_far = 0.0;
    std::size_t cases = 0;
    for (Eigen::Index p = 1; p <= 3; ++p) {
        const int steps = p == 3 ? 60 : 400;
        const double R = 4.0;
        for (const auto& set : sample_sets(rng, p)) {
            const auto grid = lattice_in(set, p, R, steps);
            if (grid.empty()) continue;
            const double h = set.kind() == SetKind::Simplex
                                 ? set.as<ConvexSet::Simplex>().scale / steps * std::sqrt(2.0)
                                 : 2.0 * R / steps;
            for (int i = 0; i < 20; ++i) {
                const Vector f = gaussian(rng, p, 1.0);
                const Vector pf = project(set, f);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& g : grid) best = std::min(best, (f - g).norm());
                // The projection is never worse than any feasible lattice point,
                // and some lattice point of K lies within one cell diagonal of it.
                worst_gap = std::max(worst_gap, (f - pf).norm() - best);
                const double dist_pf = (f - pf).norm();
                worst_far = std::max(worst_far,
                                     (best - dist_pf) / (h * std::sqrt(static_cast<double>(p))));
                ++cases;
            }
        }
    }
    const bool ok = worst_gap <= 1e-12 && worst_far <= 1.0;
    return {"projection brute force (p<=3)", ok,
            std::to_string(cases) + " cases, max excess over lattice optimum " + num(worst_gap) +
                ", lattice gap / cell " + num(worst_far)};
}

CheckResult taylor_square(Rng& rng) {
    const auto loss = LossModel::square();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vector f = gaussian(rng, 10);
        const Sample z = random_sample(rng, 10, false);
        const double gamma = std::pow(10.0, std::uniform_real_distribution<double>(-4, -1)(rng));
        const auto t = taylor_decomposition(f, z, gamma, loss);
        const double scale = std::abs(value(loss, f, z)) + std::abs(t.first_term) +
                             std::abs(t.second_term) + std::numeric_limits<double>::min();
        worst = std::max(worst, std::abs(t.residual) / scale);
    }
    return {"Taylor exactness (square)", worst <= 1e-10,
            "max relative residual " + num(worst) + " over 1000 probes"};
}

CheckResult taylor_logistic(Rng& rng) {
    const auto loss = LossModel::logistic();
    const double gammas[] = {1e-2, 1e-3, 1e-4};
    double mean_abs[3] = {0, 0, 0};
    for (int i = 0; i < 200; ++i) {
        const Vector f = gaussian(rng, 10, 0.3);
        const Sample z = random_sample(rng, 10, true);
        for (int k = 0; k < 3; ++k)
            mean_abs[k] += std::abs(taylor_decomposition(f, z, gammas[k], loss).residual) / 200.0;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 3; ++k) {
        const double x = std::log(gammas[k]), y = std::log(mean_abs[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    return {"Taylor residual order (logistic)", std::abs(slope - 3.0) <= 0.5,
            "log-log slope " + num(slope) + " (expected 3)"};
}

}  // namespace

std::vector<CheckResult> run_self_check(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> out;
    out.push_back(gradient_check(LossModel::square(), rng));
    out.push_back(gradient_check(LossModel::logistic(), rng));
    out.push_back(gradient_check(LossModel::hinge(), rng));
    out.push_back(projection_properties(rng, 3));
    out.push_back(projection_properties(rng, 10));
    out.push_back(projection_brute_force(rng));
    out.push_back(taylor_square(rng));
    out.push_back(taylor_logistic(rng));
    return out;
}

}  // namespace sgdlab::harness
