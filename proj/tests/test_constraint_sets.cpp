// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/error.hpp"
#include "test_helpers.hpp"

using namespace sgdlab;
using sgdlab::test::vec;

namespace {

std::vector<ConvexSet> sets_of_dim(Eigen::Index p) {
    Vector lo = Vector::Constant(p, -0.5), hi = Vector::Constant(p, 0.8);
    lo[0] = -1.0;
    Vector n = Vector::Ones(p);
    n[0] = -2.0;
    return {ConvexSet::whole_space(p), ConvexSet::ball(Vector::Constant(p, 0.2), 1.1),
            ConvexSet::box(lo, hi), ConvexSet::simplex(p, 1.0), ConvexSet::halfspace(n, 0.3)};
}

// Nearest point of K among lattice points; the simplex gets its own lattice
// because it has no volume.
Vector grid_nearest(const ConvexSet& set, const Vector& f, int steps, double R) {
    const Eigen::Index p = f.size();
    double best = std::numeric_limits<double>::infinity();
    Vector arg = Vector::Zero(p);
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    while (true) {
        Vector g(p);
        bool feasible;
        if (set.kind() == SetKind::Simplex) {
            int used = 0;
            for (Eigen::Index j = 0; j + 1 < p; ++j) used += idx[static_cast<std::size_t>(j)];
            feasible = used <= steps;
            for (Eigen::Index j = 0; j + 1 < p; ++j) g[j] = idx[static_cast<std::size_t>(j)] / double(steps);
            g[p - 1] = (steps - used) / double(steps);
        } else {
            for (Eigen::Index j = 0; j < p; ++j) g[j] = -R + 2 * R * idx[static_cast<std::size_t>(j)] / steps;
            feasible = contains(set, g, 0.0);
        }
        if (feasible && (f - g).norm() < best) best = (f - g).norm(), arg = g;
        Eigen::Index j = 0;
        const Eigen::Index free = set.kind() == SetKind::Simplex ? p - 1 : p;
        while (j < free && ++idx[static_cast<std::size_t>(j)] > steps) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == free) break;
    }
    return arg;
}

}  // namespace

TEST_SUITE("constraint_sets") {

TEST_CASE("projection examples") {
    const Vector f = vec({3.5, -7.25});
    CHECK(project(ConvexSet::whole_space(2), f) == f);
    CHECK(project(ConvexSet::ball(Vector::Zero(2), 1.0), vec({2, 0})) == vec({1, 0}));
    const auto simplex = ConvexSet::simplex(2, 1.0);
    CHECK((project(simplex, vec({0.5, 0.5})) - vec({0.5, 0.5})).norm() < 1e-15);
    const Vector p11 = project(simplex, vec({1, 1}));
    CHECK((p11 - vec({0.5, 0.5})).norm() < 1e-15);
    CHECK((grid_nearest(simplex, vec({1, 1}), 10000, 0) - p11).norm() <= 1e-4);
    CHECK(project(ConvexSet::box(vec({0, 0}), vec({1, 1})), vec({2, -3})) == vec({1, 0}));
    const Vector h = project(ConvexSet::halfspace(vec({0, 2}), 2.0), vec({5, 4}));
    CHECK((h - vec({5, 1})).norm() < 1e-15);
}

TEST_CASE("contains and in_interior") {
    const auto ball = ConvexSet::ball(Vector::Zero(2), 1.0);
    CHECK(contains(ball, vec({1 + 1e-6, 0}), 1e-3));
    CHECK_FALSE(contains(ball, vec({2, 0}), 1e-3));
    CHECK(in_interior(ConvexSet::whole_space(2), vec({1e9, -4}), 1e9));
    CHECK(in_interior(ball, vec({0, 0}), 0.5));
    CHECK_FALSE(in_interior(ball, vec({0.9, 0}), 0.5));
    CHECK_FALSE(in_interior(ConvexSet::simplex(3, 1.0), vec({1, 1, 1}) / 3.0, 1e-6));
}

TEST_CASE("projection invariants on random inputs") {
    std::mt19937_64 rng(17);
    for (Eigen::Index p : {2, 5, 12}) {
        for (const auto& set : sets_of_dim(p)) {
            for (int i = 0; i < 1000; ++i) {
                const Vector a = test::gaussian(rng, p, 2.0), b = test::gaussian(rng, p, 2.0);
                const Vector pa = project(set, a), pb = project(set, b);
                CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
                CHECK((project(set, pa) - pa).norm() <= 1e-12);
                CHECK(contains(set, pa, 1e-12));
                const Vector g = project(set, test::gaussian(rng, p, 2.0));
                CHECK((a - pa).dot(g - pa) <= 1e-10);
            }
        }
    }
}

TEST_CASE("projection matches grid search in dimensions 1 to 3") {
    std::mt19937_64 rng(23);
    for (Eigen::Index p = 1; p <= 3; ++p) {
        const int steps = p == 1 ? 20000 : p == 2 ? 600 : 80;
        for (const auto& set : sets_of_dim(p)) {
            for (int i = 0; i < 10; ++i) {
                const Vector f = test::gaussian(rng, p, 1.0);
                // The lattice box must cover f so that it covers P_K(f) for the whole space.
                const double R = std::max(3.0, f.cwiseAbs().maxCoeff() + 0.1);
                const double h = set.kind() == SetKind::Simplex ? 1.0 / steps : 2 * R / steps;
                const Vector pf = project(set, f);
                const Vector g = grid_nearest(set, f, steps, R);
                // Optimality: no feasible lattice point is closer than pf.
                CHECK((f - pf).norm() <= (f - g).norm() + 1e-12);
                // Resolution: strong convexity puts the lattice optimum within
                // sqrt(||f-g||^2 - ||f-pf||^2) of pf.
                CHECK((g - pf).norm() <= std::sqrt((f - g).squaredNorm() - (f - pf).squaredNorm()) + 1e-9);
                // Some lattice point of K lies within delta = 2 h sqrt(p) of pf, so
                // ||f-g|| <= d + delta and ||g-pf||^2 <= 2 d delta + delta^2.
                const double d = (f - pf).norm(), delta = 2.0 * h * std::sqrt(double(p));
                CHECK((g - pf).norm() <= std::sqrt(2 * d * delta + delta * delta));
            }
        }
    }
}

TEST_CASE("set construction is validated") {
    CHECK_THROWS_AS(ConvexSet::ball(Vector::Zero(2), -1.0), InvalidArgument);
    CHECK_THROWS_AS(ConvexSet::box(vec({1, 0}), vec({0, 1})), InvalidArgument);
    CHECK_THROWS_AS(ConvexSet::simplex(3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(ConvexSet::halfspace(Vector::Zero(2), 1.0), InvalidArgument);
    CHECK_THROWS(project(ConvexSet::ball(Vector::Zero(2), 1.0), Vector::Zero(3)));
}

}
