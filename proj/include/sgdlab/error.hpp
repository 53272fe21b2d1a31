// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgdlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised by gradient() at points where the loss has no gradient (hinge kink).
class NonDifferentiable : public Error {
public:
    using Error::Error;
};

/// Raised when no closed-form minimizer exists for a distribution/loss pair.
class NoAnalyticMinimizer : public Error {
public:
    using Error::Error;
};

/// SGD iterate became non-finite or left the divergence guard radius.
class DivergenceError : public Error {
public:
    DivergenceError(std::uint64_t step, const std::string& what)
        : Error("divergence at step " + std::to_string(step) + ": " + what),
          step_(step) {}
    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

/// Fewer usable points than an estimator needs.
class InsufficientData : public Error {
public:
    using Error::Error;
};

}  // namespace sgdlab
