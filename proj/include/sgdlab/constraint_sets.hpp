// SPDX-License-Identifier: Apache-2.0
//
// Closed convex constraint sets K with exact Euclidean projection.
#pragma once

#include <string>
#include <variant>

#include "sgdlab/types.hpp"

namespace sgdlab {

enum class SetKind { WholeSpace, Ball, Box, Simplex, Halfspace };

std::string to_string(SetKind kind);

class ConvexSet {
public:
    struct WholeSpace {};
    struct Ball { Vector center; double radius; };
    struct Box { Vector lo, hi; };
    /// {g : g >= 0, sum(g) = scale}
    struct Simplex { double scale; };
    /// {g : <normal, g> <= offset}
    struct Halfspace { Vector normal; double offset; };

    static ConvexSet whole_space(Eigen::Index p);
    static ConvexSet ball(Vector center, double radius);
    static ConvexSet box(Vector lo, Vector hi);
    static ConvexSet simplex(Eigen::Index p, double scale);
    static ConvexSet halfspace(Vector normal, double offset);

    SetKind kind() const noexcept { return static_cast<SetKind>(shape_.index()); }
    Eigen::Index dimension() const noexcept { return dim_; }
    bool bounded() const noexcept;
    /// Diameter for bounded sets, 0 otherwise. Used to scale the divergence guard.
    double diameter_proxy() const;
    std::string describe() const;

    template <class Shape>
    const Shape& as() const { return std::get<Shape>(shape_); }

private:
    using Shape = std::variant<WholeSpace, Ball, Box, Simplex, Halfspace>;
    ConvexSet(Eigen::Index dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {}

    Eigen::Index dim_;
    Shape shape_;

    friend Vector project(const ConvexSet&, const Vector&);
    friend bool in_interior(const ConvexSet&, const Vector&, double);
};

/// Unique nearest point of K to f.
Vector project(const ConvexSet& set, const Vector& f);

/// Euclidean distance from f to K.
double distance(const ConvexSet& set, const Vector& f);

/// True iff distance(f, K) <= tol.
bool contains(const ConvexSet& set, const Vector& f, double tol);

/// True iff the closed ball of radius `margin` around f lies inside K.
bool in_interior(const ConvexSet& set, const Vector& f, double margin);

}  // namespace sgdlab
