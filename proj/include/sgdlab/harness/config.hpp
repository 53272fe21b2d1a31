// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a YAML document, validated fail-closed.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/losses.hpp"
#include "sgdlab/sgd_engine.hpp"

namespace sgdlab::harness {

class ConfigError : public Error {
public:
    ConfigError(int line, std::string field, const std::string& what)
        : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    /// 1-based line of the offending node, 0 if unknown.
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& what) {
        std::string out = "config";
        if (line > 0) out += ":" + std::to_string(line);
        if (!field.empty()) out += ": field '" + field + "'";
        return out + ": " + what;
    }

    int line_;
    std::string field_;
};

struct DistributionSpec {
    DistributionKind kind = DistributionKind::LinearGaussian;
    Eigen::Index dimension = 10;
    std::vector<double> w_star;  // empty: w_star_norm * (1, ..., 1) / sqrt(p)
    double w_star_norm = 1.0;
    double noise_sigma = 0.5;
};

struct ConstraintSpec {
    SetKind kind = SetKind::Ball;
    std::vector<double> center;  // empty: origin
    double radius = 2.0;
    double lo = -1.0, hi = 1.0;  // box, per coordinate
    double scale = 1.0;          // simplex
    std::vector<double> normal;  // halfspace; empty: (1, 0, ..., 0)
    double offset = 1.0;
};

struct StabilitySpec {
    std::uint64_t m = 10000;
    std::size_t checkpoints = 20;
    std::uint64_t first_checkpoint = 100;
};

struct ConvergenceSpec {
    double epsilon = 0.05;
    std::size_t bins = 10;
    std::size_t min_per_bin = 20;
    double z = 2.0;
    std::size_t max_test_points = 200;
    std::optional<std::uint64_t> burn_in;  // default: stability.first_checkpoint
};

struct ConstantsSpec {
    std::uint64_t probes = 200;
    double radius = 2.0;
    std::uint64_t inner_draws = 1000;
};

struct RecordingSpec {
    std::uint64_t dense_until = 10000;
    int per_decade = 20;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 1;
    std::size_t replicates = 20;
    std::uint64_t n_steps = 100000;
    bool allow_non_rm = false;
    DistributionSpec distribution;
    LossKind loss = LossKind::Square;
    ConstraintSpec constraint;
    double a = 0.5, b = 1.0, alpha = 1.0;
    StabilitySpec stability;
    ConvergenceSpec convergence;
    ConstantsSpec constants;
    RecordingSpec recording;
    std::uint64_t risk_mc_draws = 100000;
    std::string output_dir;  // empty: resolved by the CLI
    bool emit_plots = false;

    StepSchedule schedule() const { return StepSchedule(a, b, alpha); }
    DataDistribution make_distribution() const;
    LossModel make_loss() const;
    ConvexSet make_constraint() const;
};

/// Parses and validates. Unknown keys, malformed values and a schedule that
/// fails the Robbins-Monro conditions without allow_non_rm are rejected.
ExperimentConfig parse_config(std::string_view text);

/// Returns `text` with the scalar at dotted `path` replaced by `value`
/// (created if absent). Used for sweeps and CLI overrides.
std::string override_value(std::string_view text, std::string_view path, std::string_view value);

/// Canonical JSON form of the config (sorted keys, no output/run-time options).
std::string canonical_json(const ExperimentConfig& cfg);

/// Default configuration as YAML text.
std::string default_config_text();

}  // namespace sgdlab::harness
