// SPDX-License-Identifier: Apache-2.0
//
// Losses V(f, z) on the linear model <f, x>, with first- and second-order
// oracles. The Hessian is only exposed through products and quadratic forms.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/types.hpp"

namespace sgdlab {

enum class LossKind { Square, Logistic, Hinge };

std::string to_string(LossKind kind);

/// Empirical lower bounds on the Lipschitz constant L (on a ball of the
/// given radius around f_K), the Hessian bound M, and the gradient growth
/// constant D. All three are running maxima over probes.
struct LossConstants {
    double L = 0.0;
    double M = 0.0;
    double D = 0.0;
    double radius = 0.0;
    std::uint64_t probes = 0;
    bool hessian_available = true;
};

class LossModel {
public:
    static LossModel square() { return LossModel(LossKind::Square); }
    static LossModel logistic() { return LossModel(LossKind::Logistic); }
    static LossModel hinge() { return LossModel(LossKind::Hinge); }

    LossKind kind() const noexcept { return kind_; }
    bool convex() const noexcept { return true; }
    bool twice_differentiable() const noexcept { return kind_ != LossKind::Hinge; }

    const std::optional<LossConstants>& constants() const noexcept { return constants_; }
    LossModel with_constants(LossConstants c) const {
        LossModel copy = *this;
        copy.constants_ = c;
        return copy;
    }

private:
    explicit LossModel(LossKind kind) : kind_(kind) {}

    LossKind kind_;
    std::optional<LossConstants> constants_;
};

double value(const LossModel& loss, const Vector& f, const Sample& z);

/// Exact gradient in f. Throws NonDifferentiable at a hinge kink.
Vector gradient(const LossModel& loss, const Vector& f, const Sample& z);

/// A subgradient; equals gradient() where it exists. At the hinge kink
/// (margin exactly 1) the zero vector is returned.
Vector subgradient(const LossModel& loss, const Vector& f, const Sample& z);

/// H(V(f, z)) v. Throws InvalidArgument for losses without a Hessian.
Vector hessian_vector_product(const LossModel& loss, const Vector& f,
                              const Sample& z, const Vector& v);

/// <u, H(V(f, z)) v>.
double hessian_quadratic_form(const LossModel& loss, const Vector& f,
                              const Sample& z, const Vector& u, const Vector& v);

/// Max over coordinates of |g_i - fd_i| / max(1, |g_i|), where fd is the
/// central difference with step h.
double check_gradient_fd(const LossModel& loss, const Vector& f, const Sample& z,
                         double h = 1e-6);

struct ConstantsOptions {
    double radius = 2.0;             // probe ball around f_K, clipped to K
    std::uint64_t inner_draws = 1000;  // Monte Carlo draws per E_z||grad||^2
    int power_iterations = 100;
};

/// Probes (f, z) pairs with f sampled uniformly in the ball of
/// `opts.radius` around f_K and projected onto K. Probe i depends only on
/// (seed, i), so more probes never lower a reported constant.
LossConstants estimate_constants(const LossModel& loss, const ConvexSet& set,
                                 const DataDistribution& dist, const Vector& f_k,
                                 std::uint64_t probes, std::uint64_t seed,
                                 const ConstantsOptions& opts = {});

/// Point i of the probe sequence used by estimate_constants.
Vector probe_point(const ConvexSet& set, const Vector& center, double radius,
                   std::uint64_t seed, std::uint64_t index);

}  // namespace sgdlab
