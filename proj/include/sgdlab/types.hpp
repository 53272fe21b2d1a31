// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "sgdlab/error.hpp"

namespace sgdlab {

/// A point of the p-dimensional hypothesis space.
using Vector = Eigen::VectorXd;

/// One observation z = (x, y).
struct Sample {
    Vector x;
    double y = 0.0;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_dimension(const Vector& v, Eigen::Index p) {
    if (v.size() != p)
        throw DimensionMismatch(static_cast<std::size_t>(p),
                                static_cast<std::size_t>(v.size()));
}

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite())
        throw InvalidArgument(std::string(what) + " has non-finite entries");
}

}  // namespace sgdlab
