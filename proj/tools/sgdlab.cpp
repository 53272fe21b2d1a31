// SPDX-License-Identifier: Apache-2.0
//
// sgdlab command line: run | stability | convergence | check | sweep | defaults
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sgdlab/error.hpp"
#include "sgdlab/harness/config.hpp"
#include "sgdlab/harness/csv.hpp"
#include "sgdlab/harness/experiment.hpp"
#include "sgdlab/harness/self_check.hpp"

namespace fs = std::filesystem;
using namespace sgdlab::harness;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;
    bool allow_non_rm = false;
    bool plots = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("config", f.config, "experiment config (YAML)")->required();
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--workers", f.workers, "concurrent replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "base seed (overrides the config)");
    cmd->add_flag("--allow-non-rm", f.allow_non_rm,
                  "accept schedules that violate the Robbins-Monro condition");
    cmd->add_flag("--plots", f.plots, "emit SVG plots");
    cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

// CLI flags are applied to the document before validation so that
// --allow-non-rm can admit an otherwise rejected schedule.
std::string load_text(const CommonFlags& f) {
    std::string text = read_file(f.config);
    if (f.seed) text = override_value(text, "seed", std::to_string(*f.seed));
    if (f.allow_non_rm) text = override_value(text, "allow_non_rm", "true");
    if (f.plots) text = override_value(text, "output.plots", "true");
    return text;
}

fs::path resolve_out(const CommonFlags& f, const ExperimentConfig& cfg) {
    if (!f.out.empty()) return f.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* root = std::getenv("SGDLAB_OUT_ROOT"); root && *root) return fs::path(root) / cfg.name;
    return fs::path("sgdlab-out") / cfg.name;
}

void print_summary(const ExperimentOutcome& o) {
    const auto& r = o.report;
    std::cout << "output: " << o.out_dir.string() << "\n";
    if (r.contains("stability") && r["stability"].contains("fit") && !r["stability"]["fit"].is_null()) {
        const auto& fit = r["stability"]["fit"];
        std::cout << "stability: slope " << fit["slope"].get<double>() << ", r^2 "
                  << fit["r_squared"].get<double>() << ", C_hat " << fit["c_hat"].get<double>()
                  << "\n";
    }
    if (r.contains("converse_bound") && r["converse_bound"].contains("violated"))
        std::cout << "converse bound: " << r["converse_bound"]["satisfied"] << " satisfied, "
                  << r["converse_bound"]["violated"] << " violated, "
                  << r["converse_bound"]["skipped"] << " skipped\n";
    if (r.contains("convergence"))
        std::cout << "convergence: " << r["convergence"]["converged_count"] << "/"
                  << r["convergence"]["replicates_completed"] << " replicates within "
                  << kConvergedNormTol << " of f_K\n";
    if (r.contains("robbins_siegmund") && r["robbins_siegmund"].contains("pass"))
        std::cout << "robbins-siegmund: violation rate "
                  << r["robbins_siegmund"]["violation_rate"].get<double>() << ", "
                  << (r["robbins_siegmund"]["pass"].get<bool>() ? "pass" : "fail") << "\n";
    for (const auto& s : o.replicates)
        if (!s.completed) std::cout << "replicate " << s.id << " aborted: " << s.error << "\n";
}

int run_mode(Mode mode, const CommonFlags& f) {
    const ExperimentConfig cfg = parse_config(load_text(f));
    ExecOptions exec{f.workers, f.quiet ? nullptr : &std::cerr};
    const auto outcome = run_experiment(cfg, mode, resolve_out(f, cfg), exec);
    print_summary(outcome);
    return outcome.exit_code;
}

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sgdlab: projected SGD stability and convergence experiments"};
    app.set_version_flag("--version", std::string(SGDLAB_VERSION));
    app.require_subcommand(1);

    CommonFlags run_f, stab_f, conv_f, sweep_f;
    auto* run_cmd = app.add_subcommand("run", "full pipeline: replicates, stability, bounds, convergence");
    add_common(run_cmd, run_f);
    auto* stab_cmd = app.add_subcommand("stability", "one trajectory, CV_on profile and rate fit");
    add_common(stab_cmd, stab_f);
    auto* conv_cmd = app.add_subcommand("convergence", "replicates, consistency curve, Robbins-Siegmund check");
    add_common(conv_cmd, conv_f);

    std::uint64_t check_seed = 1;
    auto* check_cmd = app.add_subcommand("check", "self-test of gradients, projections and Taylor terms");
    check_cmd->add_option("--seed", check_seed, "seed for random probes");

    std::string param, values, sweep_mode = "run";
    auto* sweep_cmd = app.add_subcommand("sweep", "grid over one config parameter");
    add_common(sweep_cmd, sweep_f);
    sweep_cmd->add_option("--param", param, "dotted config path, e.g. schedule.alpha")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values")->required();
    sweep_cmd->add_option("--mode", sweep_mode, "pipeline per point")
        ->check(CLI::IsMember({"run", "stability", "convergence"}));

    app.add_subcommand("defaults", "print the default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run_cmd) return run_mode(Mode::Run, run_f);
        if (*stab_cmd) return run_mode(Mode::Stability, stab_f);
        if (*conv_cmd) return run_mode(Mode::Convergence, conv_f);
        if (app.got_subcommand("defaults")) {
            std::cout << default_config_text();
            return kExitOk;
        }
        if (*check_cmd) {
            bool ok = true;
            for (const auto& r : run_self_check(check_seed)) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
                ok = ok && r.passed;
            }
            return ok ? kExitOk : kExitCheckFailure;
        }
        if (*sweep_cmd) {
            const std::string text = load_text(sweep_f);
            const auto vals = split_values(values);
            const Mode mode = sweep_mode == "stability"     ? Mode::Stability
                              : sweep_mode == "convergence" ? Mode::Convergence
                                                            : Mode::Run;
            const ExperimentConfig base = parse_config(text);
            fs::path out = resolve_out(sweep_f, base);
            ExecOptions exec{sweep_f.workers, sweep_f.quiet ? nullptr : &std::cerr};
            const auto res = run_sweep(text, param, vals, mode, out, exec);
            for (std::size_t i = 0; i < vals.size(); ++i) {
                std::cout << "== " << param << " = " << vals[i] << "\n";
                print_summary(res.points[i]);
            }
            return res.exit_code;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sgdlab::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
