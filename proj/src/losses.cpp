// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/losses.hpp"

#include <algorithm>
#include <cmath>

namespace sgdlab {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

void check_args(const Vector& f, const Sample& z) {
    require_dimension(z.x, f.size());
}

// Second derivative of the scalar link at the current point, so that
// H = curvature * x x^T for every twice-differentiable loss here.
double curvature(const LossModel& loss, const Vector& f, const Sample& z) {
    switch (loss.kind()) {
        case LossKind::Square: return 2.0;
        case LossKind::Logistic: {
            const double m = z.y * f.dot(z.x);
            return z.y * z.y * sigmoid(m) * sigmoid(-m);
        }
        case LossKind::Hinge:
            throw InvalidArgument("hinge loss has no Hessian; use subgradient");
    }
    return 0.0;
}

}  // namespace

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Square: return "square";
        case LossKind::Logistic: return "logistic";
        case LossKind::Hinge: return "hinge";
    }
    return "unknown";
}

double value(const LossModel& loss, const Vector& f, const Sample& z) {
    check_args(f, z);
    const double score = f.dot(z.x);
    switch (loss.kind()) {
        case LossKind::Square: {
            const double r = z.y - score;
            return r * r;
        }
        case LossKind::Logistic: return softplus(-z.y * score);
        case LossKind::Hinge: return std::max(0.0, 1.0 - z.y * score);
    }
    return 0.0;
}

Vector gradient(const LossModel& loss, const Vector& f, const Sample& z) {
    check_args(f, z);
    const double score = f.dot(z.x);
    switch (loss.kind()) {
        case LossKind::Square: return -2.0 * (z.y - score) * z.x;
        case LossKind::Logistic: return -z.y * sigmoid(-z.y * score) * z.x;
        case LossKind::Hinge: {
            const double margin = z.y * score;
            if (margin == 1.0)
                throw NonDifferentiable("hinge loss at margin 1 is non-differentiable; use subgradient");
            if (margin > 1.0) return Vector::Zero(f.size());
            return -z.y * z.x;
        }
    }
    return {};
}

Vector subgradient(const LossModel& loss, const Vector& f, const Sample& z) {
    if (loss.kind() == LossKind::Hinge) {
        check_args(f, z);
        if (z.y * f.dot(z.x) >= 1.0) return Vector::Zero(f.size());
        return -z.y * z.x;
    }
    return gradient(loss, f, z);
}

Vector hessian_vector_product(const LossModel& loss, const Vector& f,
                              const Sample& z, const Vector& v) {
    check_args(f, z);
    require_dimension(v, f.size());
    return curvature(loss, f, z) * z.x.dot(v) * z.x;
}

double hessian_quadratic_form(const LossModel& loss, const Vector& f,
                              const Sample& z, const Vector& u, const Vector& v) {
    check_args(f, z);
    require_dimension(u, f.size());
    require_dimension(v, f.size());
    return curvature(loss, f, z) * z.x.dot(u) * z.x.dot(v);
}

double check_gradient_fd(const LossModel& loss, const Vector& f, const Sample& z,
                         double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    const Vector g = gradient(loss, f, z);
    double worst = 0.0;
    Vector probe = f;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        probe[i] = f[i] + h;
        const double up = value(loss, probe, z);
        probe[i] = f[i] - h;
        const double down = value(loss, probe, z);
        probe[i] = f[i];
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(g[i])));
    }
    return worst;
}

Vector probe_point(const ConvexSet& set, const Vector& center, double radius,
                   std::uint64_t seed, std::uint64_t index) {
    const Eigen::Index p = center.size();
    Vector dir(p);
    const StreamKey key{seed, streams::kProbe};
    fill_normals(key, index, 0, {dir.data(), static_cast<std::size_t>(p)});
    const double n = dir.norm();
    if (n > 0.0) dir /= n;
    const auto block = static_cast<std::uint32_t>((p + 1) / 2);
    const double u = uniform_pair(key, index, block)[0];
    const double r = radius * std::pow(u, 1.0 / static_cast<double>(p));
    return project(set, center + r * dir);
}

LossConstants estimate_constants(const LossModel& loss, const ConvexSet& set,
                                 const DataDistribution& dist, const Vector& f_k,
                                 std::uint64_t probes, std::uint64_t seed,
                                 const ConstantsOptions& opts) {
    if (probes < 1) throw InvalidArgument("estimate_constants needs at least one probe");
    require_dimension(f_k, dist.dimension());
    LossConstants out;
    out.radius = opts.radius;
    out.probes = probes;
    out.hessian_available = loss.twice_differentiable();

    const StreamKey outer{seed, streams::kConstants};
    const StreamKey inner{seed, streams::kConstants + 1};
    const Eigen::Index p = f_k.size();
    for (std::uint64_t i = 0; i < probes; ++i) {
        const Vector f = probe_point(set, f_k, opts.radius, seed, i);
        const Sample z = dist.draw(outer, i);

        out.L = std::max(out.L, subgradient(loss, f, z).norm());

        if (out.hessian_available) {
            // Power iteration; H is PSD so this converges to ||H||.
            Vector v(p);
            fill_normals(StreamKey{seed, streams::kConstants + 2}, i, 0,
                         {v.data(), static_cast<std::size_t>(p)});
            v.normalize();
            double lambda = 0.0;
            for (int it = 0; it < opts.power_iterations; ++it) {
                Vector hv = hessian_vector_product(loss, f, z, v);
                const double n = hv.norm();
                if (n == 0.0) break;
                lambda = v.dot(hv);
                v = hv / n;
            }
            out.M = std::max(out.M, hessian_quadratic_form(loss, f, z, v, v));
            out.M = std::max(out.M, lambda);
        }

        double second_moment = 0.0;
        for (std::uint64_t j = 0; j < opts.inner_draws; ++j) {
            const Sample zz = dist.draw(inner, i * opts.inner_draws + j);
            second_moment += subgradient(loss, f, zz).squaredNorm();
        }
        second_moment /= static_cast<double>(std::max<std::uint64_t>(1, opts.inner_draws));
        out.D = std::max(out.D, second_moment / (1.0 + (f - f_k).squaredNorm()));
    }
    return out;
}

}  // namespace sgdlab
