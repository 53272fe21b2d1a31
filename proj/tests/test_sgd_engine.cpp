// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "sgdlab/error.hpp"
#include "sgdlab/risk.hpp"
#include "sgdlab/sgd_engine.hpp"
#include "test_helpers.hpp"

using namespace sgdlab;
using sgdlab::test::vec;

namespace {

const Vector kW = vec({1.0, 1.0}) / std::sqrt(2.0);

std::vector<double> final_errors(const StepSchedule& s, std::uint64_t n, std::uint64_t check_at,
                                 std::vector<double>* at_check = nullptr) {
    const auto d = make_linear_gaussian(kW, 0.5);
    const auto set = ConvexSet::ball(Vector::Zero(2), 2.0);
    RunOptions ro;
    ro.extra_indices = {check_at};
    std::vector<double> out;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = run_sgd(d, LossModel::square(), set, s, n, seed, ro);
        out.push_back((t.final_iterate() - kW).norm());
        if (at_check) at_check->push_back((t.iterate_at(check_at) - kW).norm());
    }
    return out;
}

}  // namespace

TEST_SUITE("sgd_engine") {

TEST_CASE("Robbins-Monro classification") {
    CHECK(robbins_monro_check(StepSchedule(0.5, 1, 1.0)).pass);
    CHECK(robbins_monro_check(StepSchedule(0.5, 1, 0.75)).pass);
    const auto low = robbins_monro_check(StepSchedule(0.5, 1, 0.4));
    CHECK_FALSE(low.pass);
    CHECK(low.divergent_sum);
    CHECK_FALSE(low.convergent_sq_sum);
    const auto high = robbins_monro_check(StepSchedule(0.5, 1, 1.5));
    CHECK_FALSE(high.pass);
    CHECK_FALSE(high.divergent_sum);
    CHECK_FALSE(robbins_monro_check(StepSchedule(0.5, 1, 0.5)).pass);
    CHECK_FALSE(robbins_monro_check(StepSchedule(0.05, 0, 0.0)).pass);
    // Pure function of alpha.
    CHECK(robbins_monro_check(StepSchedule(3.0, 7, 0.9)).pass ==
          robbins_monro_check(StepSchedule(0.1, 0, 0.9)).pass);
}

TEST_CASE("schedule values and monotonicity") {
    const StepSchedule s(0.5, 1.0, 1.0);
    CHECK(s.gamma(0) == 0.25);
    CHECK(s.gamma(3) == 0.1);
    for (std::uint64_t n = 0; n < 10000; ++n) CHECK(s.gamma(n + 1) < s.gamma(n));
    CHECK(StepSchedule(0.05, 0, 0).gamma(12345) == 0.05);
    CHECK_THROWS_AS(StepSchedule(0.0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(StepSchedule(1.0, 1, -0.5), InvalidArgument);
}

TEST_CASE("single projected steps") {
    const auto sq = LossModel::square();
    const Sample z{vec({1, 0}), 1.0};
    const auto r = sgd_step(vec({0, 0}), z, 0.1, sq, ConvexSet::whole_space(2));
    CHECK((r.f_next - vec({0.2, 0})).norm() < 1e-15);
    CHECK_FALSE(r.projection_was_active);

    const Vector w = vec({0.3, -0.6});
    const Sample zc{vec({2, 1}), w.dot(vec({2, 1}))};
    CHECK(sgd_step(w, zc, 0.1, sq, ConvexSet::ball(Vector::Zero(2), 1.0)).f_next == w);

    const auto out = sgd_step(vec({0, 0}), Sample{vec({1, 0}), 10.0}, 0.5, sq,
                              ConvexSet::ball(Vector::Zero(2), 1.0));
    CHECK(out.projection_was_active);
    CHECK(out.f_next.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("run_sgd base case and determinism") {
    const auto d = make_linear_gaussian(vec({0.4, -0.2, 0.1}), 0.5);
    const auto set = ConvexSet::ball(Vector::Zero(3), 2.0);
    const StepSchedule s;
    const auto t1 = run_sgd(d, LossModel::square(), set, s, 1, 9);
    const auto step = sgd_step(Vector::Zero(3), draw(d, 9, 0), s.gamma(0), LossModel::square(), set);
    CHECK(t1.final_iterate() == step.f_next);
    CHECK(t1.indices == std::vector<std::uint64_t>{0, 1});

    const auto a = run_sgd(d, LossModel::square(), set, s, 5000, 9);
    const auto b = run_sgd(d, LossModel::square(), set, s, 5000, 9);
    CHECK(a.indices == b.indices);
    CHECK(a.step_losses == b.step_losses);
    for (std::size_t i = 0; i < a.iterates.size(); ++i) CHECK(a.iterates[i] == b.iterates[i]);
    CHECK_THROWS_AS(run_sgd(d, LossModel::square(), set, s, 0, 9), InvalidArgument);
}

TEST_CASE("recorded iterates are feasible") {
    const auto d = make_linear_gaussian(vec({3.0, 0.0, -1.0}), 1.0);
    for (const auto& set : {ConvexSet::ball(Vector::Zero(3), 1.0), ConvexSet::simplex(3, 1.0),
                            ConvexSet::box(Vector::Constant(3, -0.5), Vector::Constant(3, 0.5)),
                            ConvexSet::halfspace(vec({1, 1, 1}), 0.2)}) {
        const auto t = run_sgd(d, LossModel::square(), set, StepSchedule(), 20000, 3);
        // f_0 = 0 need not lie in K; every later iterate must.
        for (std::size_t i = 0; i < t.iterates.size(); ++i)
            if (t.indices[i] > 0) CHECK(contains(set, t.iterates[i], 1e-9));
    }
}

TEST_CASE("divergence is detected") {
    const auto d = make_linear_gaussian(vec({1.0, 1.0}), 0.5);
    CHECK_THROWS_AS(run_sgd(d, LossModel::square(), ConvexSet::whole_space(2),
                            StepSchedule(20.0, 0.0, 1.0), 1000, 1),
                    DivergenceError);
}

TEST_CASE("compliant schedule converges in at least 18 of 20 seeds") {
    const auto errs = final_errors(StepSchedule(0.5, 1, 1), 100000, 10000);
    int ok = 0;
    for (double e : errs) ok += e < 0.1;
    CHECK(ok >= 18);
}

TEST_CASE("negative controls do not converge") {
    std::vector<double> rm_mid, fast_mid, const_mid;
    const auto rm = final_errors(StepSchedule(0.5, 1, 1.0), 100000, 10000, &rm_mid);
    const auto fast = final_errors(StepSchedule(0.5, 1, 1.5), 100000, 10000, &fast_mid);
    const auto constant = final_errors(StepSchedule(0.05, 0, 0.0), 100000, 10000, &const_mid);
    // Summable steps stall: the error stays above the compliant run's error.
    CHECK(test::median(fast) >= test::median(rm));
    CHECK(test::median(fast) >= 0.5 * test::median(fast_mid));
    // Constant step: stationary noise floor of order sqrt(gamma) sigma.
    CHECK(test::median(constant) > 0.02);
    CHECK(test::median(constant) >= 0.5 * test::median(const_mid));
    CHECK(test::median(constant) > 2.0 * test::median(rm));
}

TEST_CASE("projection inactivity") {
    const auto sq = LossModel::square();
    const auto d = make_linear_gaussian(kW, 0.5);
    const auto free_run = run_sgd(d, sq, ConvexSet::whole_space(2), StepSchedule(), 20000, 2);
    CHECK(projection_inactivity_index(free_run) == std::optional<std::uint64_t>(0));

    const auto interior = run_sgd(d, sq, ConvexSet::ball(Vector::Zero(2), 2.0), StepSchedule(), 100000, 2);
    const auto N = projection_inactivity_index(interior);
    REQUIRE(N.has_value());
    CHECK(*N < 100000);
    CHECK(projection_activity_fraction(interior, *N) == 0.0);

    // w* outside K: f_K sits on the boundary and the projection keeps firing.
    const auto out = make_linear_gaussian(vec({3.0, 0.0}), 0.5);
    int recurring = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t = run_sgd(out, sq, ConvexSet::ball(Vector::Zero(2), 1.0), StepSchedule(), 20000, seed);
        recurring += projection_activity_fraction(t, 10000) > 0.0;
    }
    CHECK(recurring >= 3);
}

TEST_CASE("ERM solver") {
    const auto sq = LossModel::square();
    const Vector w = vec({0.5, -1.0, 2.0});
    const auto clean = make_linear_gaussian(w, 0.0);
    const Dataset data = sample_dataset(clean, 4, 50);
    const auto r = erm_solve(data, sq, ConvexSet::whole_space(3), 1e-10);
    CHECK(r.converged);
    CHECK((r.f - w).norm() < 1e-8);
    for (std::size_t k = 1; k < r.objective_history.size(); ++k)
        CHECK(r.objective_history[k] <= r.objective_history[k - 1]);

    const auto noisy = make_linear_gaussian(w, 0.5);
    const auto set = ConvexSet::ball(Vector::Zero(3), 1.0);
    const Dataset nd = sample_dataset(noisy, 5, 200);
    const auto rc = erm_solve(nd, sq, set, 1e-9);
    const Vector fk = true_minimizer(noisy, sq, set);
    CHECK(empirical_risk(sq, rc.f, nd) <= empirical_risk(sq, fk, nd) + 1e-9);
    CHECK(contains(set, rc.f, 1e-12));

    const Dataset single = sample_dataset(noisy, 6, 1);
    const auto r1 = erm_solve(single, sq, ConvexSet::whole_space(3), 1e-12);
    CHECK(std::abs(r1.f.dot(single.samples[0].x) - single.samples[0].y) < 1e-9);
}

}
