// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/constraint_sets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

namespace sgdlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Sort-and-threshold projection onto {g >= 0, sum g = scale}.
Vector project_simplex(const Vector& f, double scale) {
    std::vector<double> sorted(f.data(), f.data() + f.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double threshold = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumsum += sorted[j];
        const double candidate = (cumsum - scale) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) threshold = candidate;
    }
    return (f.array() - threshold).max(0.0).matrix();
}

}  // namespace

std::string to_string(SetKind kind) {
    switch (kind) {
        case SetKind::WholeSpace: return "whole-space";
        case SetKind::Ball: return "ball";
        case SetKind::Box: return "box";
        case SetKind::Simplex: return "simplex";
        case SetKind::Halfspace: return "halfspace";
    }
    return "unknown";
}

ConvexSet ConvexSet::whole_space(Eigen::Index p) {
    if (p <= 0) throw InvalidArgument("dimension must be positive");
    return {p, WholeSpace{}};
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
    if (center.size() == 0) throw InvalidArgument("ball center must be nonempty");
    require_finite(center, "ball center");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("ball radius must be positive and finite");
    const Eigen::Index p = center.size();
    return {p, Ball{std::move(center), radius}};
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
    if (lo.size() == 0) throw InvalidArgument("box bounds must be nonempty");
    require_dimension(hi, lo.size());
    if (lo.hasNaN() || hi.hasNaN()) throw InvalidArgument("box bounds contain NaN");
    if ((lo.array() > hi.array()).any()) throw InvalidArgument("box requires lo <= hi");
    const Eigen::Index p = lo.size();
    return {p, Box{std::move(lo), std::move(hi)}};
}

ConvexSet ConvexSet::simplex(Eigen::Index p, double scale) {
    if (p <= 0) throw InvalidArgument("dimension must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw InvalidArgument("simplex scale must be positive and finite");
    return {p, Simplex{scale}};
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
    if (normal.size() == 0) throw InvalidArgument("halfspace normal must be nonempty");
    require_finite(normal, "halfspace normal");
    if (normal.norm() == 0.0) throw InvalidArgument("halfspace normal must be nonzero");
    if (!std::isfinite(offset)) throw InvalidArgument("halfspace offset must be finite");
    const Eigen::Index p = normal.size();
    return {p, Halfspace{std::move(normal), offset}};
}

bool ConvexSet::bounded() const noexcept {
    switch (kind()) {
        case SetKind::Ball:
        case SetKind::Simplex: return true;
        case SetKind::Box: return as<Box>().lo.allFinite() && as<Box>().hi.allFinite();
        default: return false;
    }
}

double ConvexSet::diameter_proxy() const {
    if (!bounded()) return 0.0;
    return std::visit(
        overloaded{[](const Ball& b) { return 2.0 * b.radius; },
                   [](const Box& b) { return (b.hi - b.lo).norm(); },
                   [](const Simplex& s) { return s.scale * std::sqrt(2.0); },
                   [](const auto&) { return 0.0; }},
        shape_);
}

std::string ConvexSet::describe() const {
    std::ostringstream os;
    os << to_string(kind()) << "(p=" << dim_;
    std::visit(overloaded{[&](const Ball& b) { os << ", radius=" << b.radius; },
                          [&](const Simplex& s) { os << ", scale=" << s.scale; },
                          [&](const Halfspace& h) { os << ", offset=" << h.offset; },
                          [](const auto&) {}},
               shape_);
    os << ")";
    return os.str();
}

Vector project(const ConvexSet& set, const Vector& f) {
    require_dimension(f, set.dim_);
    return std::visit(
        overloaded{
            [&](const ConvexSet::WholeSpace&) -> Vector { return f; },
            [&](const ConvexSet::Ball& b) -> Vector {
                const Vector offset = f - b.center;
                const double r = offset.norm();
                if (r <= b.radius) return f;
                return b.center + (b.radius / r) * offset;
            },
            [&](const ConvexSet::Box& b) -> Vector {
                return f.cwiseMax(b.lo).cwiseMin(b.hi);
            },
            [&](const ConvexSet::Simplex& s) -> Vector {
                return project_simplex(f, s.scale);
            },
            [&](const ConvexSet::Halfspace& h) -> Vector {
                const double excess = h.normal.dot(f) - h.offset;
                if (excess <= 0.0) return f;
                return f - (excess / h.normal.squaredNorm()) * h.normal;
            }},
        set.shape_);
}

double distance(const ConvexSet& set, const Vector& f) {
    return (f - project(set, f)).norm();
}

bool contains(const ConvexSet& set, const Vector& f, double tol) {
    if (tol < 0.0) throw InvalidArgument("tolerance must be >= 0");
    return distance(set, f) <= tol;
}

bool in_interior(const ConvexSet& set, const Vector& f, double margin) {
    if (!(margin > 0.0)) throw InvalidArgument("margin must be positive");
    require_dimension(f, set.dim_);
    return std::visit(
        overloaded{
            [](const ConvexSet::WholeSpace&) { return true; },
            [&](const ConvexSet::Ball& b) {
                return (f - b.center).norm() + margin <= b.radius;
            },
            [&](const ConvexSet::Box& b) {
                return ((f - b.lo).array() >= margin).all() &&
                       ((b.hi - f).array() >= margin).all();
            },
            // Lies in an affine hyperplane: empty interior in R^p.
            [](const ConvexSet::Simplex&) { return false; },
            [&](const ConvexSet::Halfspace& h) {
                return (h.offset - h.normal.dot(f)) / h.normal.norm() >= margin;
            }},
        set.shape_);
}

}  // namespace sgdlab
