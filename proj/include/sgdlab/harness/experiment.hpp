// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: replicate runs, stability and convergence
// diagnostics, and the on-disk artifact bundle.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sgdlab/harness/config.hpp"

namespace sgdlab::harness {

enum class Mode { Run, Stability, Convergence };

std::string to_string(Mode mode);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitCheckFailure = 3;

/// A replicate counts as converged when ||f_N - f_K|| is below this.
inline constexpr double kConvergedNormTol = 0.1;
/// Number of geometric checkpoints in [1, n_steps] for the convergence table.
inline constexpr std::size_t kConvergencePoints = 50;
/// Sample size for the reference solution when f_K has no closed form.
inline constexpr std::size_t kReferenceSamples = 20000;

struct ExecOptions {
    std::size_t workers = 1;
    std::ostream* log = nullptr;  // progress lines; nullptr is silent
};

struct ReplicateStatus {
    std::size_t id = 0;
    std::uint64_t seed = 0;
    bool completed = false;
    std::string error;
};

struct ExperimentOutcome {
    std::filesystem::path out_dir;
    nlohmann::json report;
    nlohmann::json manifest;
    std::vector<ReplicateStatus> replicates;
    int exit_code = kExitOk;
};

/// Output paths are relative to `out_dir`:
///   trajectories/replicate_XXX.csv, stability.csv, convergence.csv,
///   report.json, plots/*.svg (optional), manifest.json.
/// Replicate r uses seed cfg.seed + r. Outputs do not depend on the worker count.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, Mode mode,
                                 const std::filesystem::path& out_dir,
                                 const ExecOptions& exec = {});

struct SweepOutcome {
    std::vector<std::string> values;
    std::vector<ExperimentOutcome> points;
    int exit_code = kExitOk;
};

/// One bundle per value under out_dir/<param>=<value>, plus
/// out_dir/sweep_manifest.json. `adjust` is applied to every parsed point
/// config (CLI overrides). Every point is parsed before anything runs, so a
/// bad value fails with ConfigError and no output.
SweepOutcome run_sweep(std::string_view config_text, std::string_view param,
                       const std::vector<std::string>& values, Mode mode,
                       const std::filesystem::path& out_dir, const ExecOptions& exec = {},
                       const std::function<void(ExperimentConfig&)>& adjust = {});

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace sgdlab::harness
