// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/harness/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/convergence_monitor.hpp"
#include "sgdlab/error.hpp"
#include "sgdlab/harness/csv.hpp"
#include "sgdlab/harness/svg.hpp"
#include "sgdlab/risk.hpp"
#include "sgdlab/stability_lab.hpp"

#ifndef SGDLAB_VERSION
#define SGDLAB_VERSION "dev"
#endif

namespace sgdlab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Run: return "run";
        case Mode::Stability: return "stability";
        case Mode::Convergence: return "convergence";
    }
    return "run";
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    std::ostringstream o;
    for (unsigned int i = 0; i < len; ++i)
        o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return o.str();
}

namespace {

class Logger {
public:
    explicit Logger(std::ostream* out, std::string prefix) : out_(out), prefix_(std::move(prefix)) {}
    void operator()(const std::string& line) const {
        if (!out_) return;
        static std::mutex mu;
        std::lock_guard lock(mu);
        *out_ << "[" << prefix_ << "] " << line << '\n' << std::flush;
    }

private:
    std::ostream* out_;
    std::string prefix_;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// thrown by any task is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::vector<std::exception_ptr> errors(n);
    auto guarded = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) guarded(i);
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Reference {
    Vector f_k;
    std::string source;
};

Reference reference_minimizer(const DataDistribution& dist, const LossModel& loss,
                              const ConvexSet& set, std::uint64_t seed) {
    try {
        return {true_minimizer(dist, loss, set), "projection of w* onto K"};
    } catch (const NoAnalyticMinimizer&) {
    }
    // Logistic loss on logistic-gaussian data is well specified: the
    // unconstrained minimizer is w*, so it is also f_K whenever w* is in K.
    if (dist.kind() == DistributionKind::LogisticGaussian && loss.kind() == LossKind::Logistic &&
        contains(set, dist.w_star(), 0.0))
        return {dist.w_star(), "w* (well-specified logistic model, w* in K)"};

    Dataset data;
    data.seed = seed;
    data.origin = "reference";
    data.samples.reserve(kReferenceSamples);
    for (std::size_t i = 0; i < kReferenceSamples; ++i)
        data.samples.push_back(dist.draw(StreamKey{seed, streams::kReference}, i));
    const auto erm = erm_solve(data, loss, set, 1e-8, 5000);
    return {erm.f, "empirical risk minimizer on " + std::to_string(kReferenceSamples) +
                       " reference draws" + (erm.converged ? "" : " (not converged)")};
}

json fit_json(const RateFit& f) {
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"c_hat", f.c_hat},
            {"r_squared", f.r_squared},
            {"used_points", f.used_points}};
}

json bound_json(const std::vector<BoundCheckRow>& rows) {
    const auto s = summarize(rows);
    json jr = json::array();
    for (const auto& r : rows)
        jr.push_back({{"n", r.n},
                      {"gamma", r.gamma},
                      {"lhs_mean", r.lhs_mean},
                      {"lhs_ci", r.lhs_ci},
                      {"rhs", r.rhs},
                      {"status", to_string(r.status)},
                      {"note", r.note}});
    return {{"satisfied", s.satisfied},
            {"violated", s.violated},
            {"skipped", s.skipped},
            {"all_usable_satisfied", s.all_usable_satisfied()},
            {"rows", jr}};
}

json summability_json(const SummabilityReport& s) {
    return {{"partial_sum", s.partial_sum},
            {"tail_increment_ratio", s.tail_increment_ratio},
            {"decay_exponent", s.decay_exponent},
            {"summable", s.summable}};
}

std::string replicate_name(std::size_t r) {
    std::ostringstream o;
    o << "replicate_" << std::setw(3) << std::setfill('0') << r << ".csv";
    return o.str();
}

struct ReplicateResult {
    ReplicateStatus status;
    std::string csv;
    std::vector<double> excess_at_conv;  // one per convergence checkpoint
    std::vector<double> v_at_conv;       // ||f_n - f_K||^2
    std::vector<double> eta_prefix_at_conv;
    std::vector<double> norm_at_conv;
    double final_norm_error = 0.0;
    double final_excess = 0.0;
    double late_projection_fraction = 0.0;
    std::optional<std::uint64_t> inactivity_index;
    std::optional<MonitorSeries> monitor;
};

struct Problem {
    DataDistribution dist;
    LossModel loss;
    ConvexSet set;
    StepSchedule schedule;
    Reference ref;
    bool risk_exact = false;
    bool monitor_possible = false;
    std::vector<std::uint64_t> stability_cps;
    std::vector<std::uint64_t> convergence_cps;
    RunOptions run_opts;
};

std::string trajectory_csv(const Trajectory& t, const Problem& p, const RiskOptions& ropts) {
    const std::set<std::uint64_t> risk_rows(p.convergence_cps.begin(), p.convergence_cps.end());
    CsvTable csv({"n", "gamma_n", "loss_at_step", "norm_error", "excess_risk", "projection_active"});
    const auto N = t.n_steps();
    for (std::size_t i = 0; i < t.indices.size(); ++i) {
        const auto n = t.indices[i];
        const Vector& f = t.iterates[i];
        csv.cell(n).cell(p.schedule.gamma(n));
        if (n < N) csv.cell(t.step_losses[n]);
        else csv.empty();
        csv.cell(norm_error(f, p.ref.f_k));
        if (p.risk_exact || risk_rows.count(n))
            csv.cell(excess_risk(p.dist, p.loss, f, p.ref.f_k, ropts).value);
        else
            csv.empty();
        if (n < N) csv.cell(static_cast<std::uint64_t>(t.projection_active[n]));
        else csv.empty();
        csv.end_row();
    }
    return csv.str();
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, const Problem& p, std::size_t r,
                              std::optional<double> c_hat, double hessian_bound,
                              bool want_metrics) {
    ReplicateResult out;
    out.status.id = r;
    out.status.seed = cfg.seed + r;
    const RiskOptions ropts{cfg.risk_mc_draws, cfg.seed};
    try {
        RunOptions ro = p.run_opts;
        std::optional<SgdMonitorRecorder> recorder;
        if (want_metrics && p.monitor_possible && c_hat) {
            recorder.emplace(p.dist, p.loss, p.ref.f_k, p.schedule, *c_hat, hessian_bound,
                             static_cast<int>(r));
            ro.observer = recorder->observer();
        }
        const Trajectory t =
            run_sgd(p.dist, p.loss, p.set, p.schedule, cfg.n_steps, out.status.seed, ro);
        out.csv = trajectory_csv(t, p, ropts);
        if (want_metrics) {
            std::vector<double> eta_prefix;
            if (recorder) {
                out.monitor = recorder->take();
                eta_prefix.assign(out.monitor->eta.size() + 1, 0.0);
                for (std::size_t k = 0; k < out.monitor->eta.size(); ++k)
                    eta_prefix[k + 1] = eta_prefix[k] + out.monitor->eta[k];
            }
            for (const auto n : p.convergence_cps) {
                const Vector& f = t.iterate_at(n);
                const double e = norm_error(f, p.ref.f_k);
                out.norm_at_conv.push_back(e);
                out.v_at_conv.push_back(e * e);
                out.excess_at_conv.push_back(excess_risk(p.dist, p.loss, f, p.ref.f_k, ropts).value);
                if (!eta_prefix.empty())
                    out.eta_prefix_at_conv.push_back(eta_prefix[std::min<std::size_t>(n, eta_prefix.size() - 1)]);
            }
            out.final_norm_error = norm_error(t.final_iterate(), p.ref.f_k);
            out.final_excess = out.excess_at_conv.back();
            out.late_projection_fraction = projection_activity_fraction(t, cfg.n_steps / 2);
            out.inactivity_index = projection_inactivity_index(t);
        }
        out.status.completed = true;
    } catch (const Error& e) {
        out.status.completed = false;
        out.status.error = e.what();
    }
    return out;
}

MonitorOptions monitor_options(const ExperimentConfig& cfg) {
    MonitorOptions m;
    m.bins = cfg.convergence.bins;
    m.min_per_bin = cfg.convergence.min_per_bin;
    m.z = cfg.convergence.z;
    m.max_test_points = cfg.convergence.max_test_points;
    m.burn_in = cfg.convergence.burn_in.value_or(cfg.stability.first_checkpoint);
    return m;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, Mode mode, const fs::path& out_dir,
                                 const ExecOptions& exec) {
    const Logger log(exec.log, cfg.name);
    ExperimentOutcome outcome;
    outcome.out_dir = out_dir;

    Problem p{cfg.make_distribution(), cfg.make_loss(), cfg.make_constraint(), cfg.schedule(),
              {}, false, false, {}, {}, {}};
    p.ref = reference_minimizer(p.dist, p.loss, p.set, cfg.seed);
    p.risk_exact = excess_risk(p.dist, p.loss, p.ref.f_k, p.ref.f_k, RiskOptions{2, cfg.seed}).exact;
    p.monitor_possible = p.dist.kind() == DistributionKind::LinearGaussian &&
                         p.loss.kind() == LossKind::Square;
    p.stability_cps = geometric_checkpoints(cfg.stability.first_checkpoint, cfg.n_steps - 1,
                                            cfg.stability.checkpoints);
    p.convergence_cps = geometric_checkpoints(1, cfg.n_steps, kConvergencePoints);
    p.run_opts.dense_until = cfg.recording.dense_until;
    p.run_opts.per_decade = cfg.recording.per_decade;
    p.run_opts.extra_indices = p.stability_cps;
    p.run_opts.extra_indices.insert(p.run_opts.extra_indices.end(), p.convergence_cps.begin(),
                                    p.convergence_cps.end());

    const auto rm = robbins_monro_check(p.schedule);
    json report;
    report["name"] = cfg.name;
    report["mode"] = to_string(mode);
    report["version"] = SGDLAB_VERSION;
    report["config_sha256"] = sha256_hex(canonical_json(cfg));
    report["problem"] = {{"dimension", p.dist.dimension()},
                         {"distribution", to_string(p.dist.kind())},
                         {"loss", to_string(p.loss.kind())},
                         {"constraint", p.set.describe()},
                         {"f_k", std::vector<double>(p.ref.f_k.begin(), p.ref.f_k.end())},
                         {"f_k_source", p.ref.source},
                         {"f_k_interior_margin_0_3", in_interior(p.set, p.ref.f_k, 0.3)}};
    report["schedule"] = {{"a", p.schedule.a()},
                          {"b", p.schedule.b()},
                          {"alpha", p.schedule.alpha()},
                          {"robbins_monro",
                           {{"divergent_sum", rm.divergent_sum},
                            {"convergent_sq_sum", rm.convergent_sq_sum},
                            {"pass", rm.pass}}}};

    std::vector<std::pair<std::string, std::string>> files;  // relative path, content
    std::vector<ReplicateResult> results;
    const std::size_t R = mode == Mode::Stability ? 1 : cfg.replicates;

    // Phase A: replicate 0, the stability profile and the bounds that need it.
    std::optional<RateFit> fit;
    std::optional<LossConstants> constants;
    StabilitySeries series;
    bool phase_a_failed = false;
    const bool need_stability = mode != Mode::Convergence || p.monitor_possible;
    if (need_stability) {
        log("phase A: replicate 0, " + std::to_string(cfg.n_steps) + " steps");
        try {
            RunOptions ro = p.run_opts;
            const Trajectory t0 = run_sgd(p.dist, p.loss, p.set, p.schedule, cfg.n_steps, cfg.seed, ro);
            if (mode != Mode::Stability) {
                log("estimating constants from " + std::to_string(cfg.constants.probes) + " probes");
                ConstantsOptions co;
                co.radius = cfg.constants.radius;
                co.inner_draws = cfg.constants.inner_draws;
                constants = estimate_constants(p.loss, p.set, p.dist, p.ref.f_k,
                                               cfg.constants.probes, cfg.seed, co);
                report["constants"] = {{"L", constants->L},
                                       {"M", constants->M},
                                       {"D", constants->D},
                                       {"radius", constants->radius},
                                       {"probes", constants->probes},
                                       {"hessian_available", constants->hessian_available}};
            }
            log("stability profile at " + std::to_string(p.stability_cps.size()) + " checkpoints, m = " +
                std::to_string(cfg.stability.m));
            series = cvon_profile(t0, p.dist, p.loss, p.set, cfg.stability.m, cfg.seed, p.stability_cps);
            json js;
            js["checkpoints"] = series.size();
            js["m"] = series.m_samples;
            try {
                fit = fit_rate(series);
                js["fit"] = fit_json(*fit);
            } catch (const InsufficientData& e) {
                js["fit"] = nullptr;
                js["fit_error"] = e.what();
            }
            const auto pooled = pooled_gap(series);
            bool above = true;
            for (std::size_t i = 0; i < series.size(); ++i)
                above = above && series.beta_hat[i] >= -series.ci_halfwidth[i];
            js["pooled_gap"] = {{"mean", pooled.mean}, {"ci_halfwidth", pooled.ci_halfwidth}};
            js["all_beta_above_minus_ci"] = above;
            js["pooled_positive_95"] = pooled.mean - pooled.ci_halfwidth > 0.0;
            report["stability"] = js;

            if (mode == Mode::Run) {
                if (fit && constants && constants->hessian_available) {
                    log("converse bound check");
                    report["converse_bound"] = bound_json(converse_bound_check(
                        t0, p.dist, p.loss, fit->c_hat, constants->M, cfg.stability.m, cfg.seed,
                        p.stability_cps));
                } else {
                    report["converse_bound"] = {
                        {"skipped_reason", !fit ? "no rate fit" : "loss has no Hessian bound"}};
                }
                log("gradient growth check");
                report["growth_bound"] = bound_json(grad_growth_check(
                    t0, p.dist, p.loss, p.ref.f_k, constants->D, cfg.stability.m, cfg.seed,
                    p.stability_cps));
            }
            if (mode == Mode::Stability) {
                ReplicateResult r0;
                r0.status = {0, cfg.seed, true, ""};
                r0.csv = trajectory_csv(t0, p, RiskOptions{cfg.risk_mc_draws, cfg.seed});
                results.push_back(std::move(r0));
            }
        } catch (const DivergenceError& e) {
            phase_a_failed = true;
            report["phase_a_error"] = e.what();
            log(std::string("replicate 0 diverged: ") + e.what());
            results.clear();
            ReplicateResult r0;
            r0.status = {0, cfg.seed, false, e.what()};
            results.push_back(std::move(r0));
        }
    }

    // Phase B: all replicates, with the monitor decomposition where available.
    if (mode != Mode::Stability && !(phase_a_failed && mode == Mode::Run)) {
        log("phase B: " + std::to_string(R) + " replicates on " + std::to_string(exec.workers) +
            " worker(s)");
        std::optional<double> c_hat;
        if (fit) c_hat = fit->c_hat;
        const double M = constants ? constants->M : 0.0;
        results.assign(R, {});
        parallel_for(R, exec.workers, [&](std::size_t r) {
            results[r] = run_replicate(cfg, p, r, c_hat, M, true);
            log("replicate " + std::to_string(r) +
                (results[r].status.completed ? " done" : " failed: " + results[r].status.error));
        });

        std::vector<const ReplicateResult*> ok;
        for (const auto& r : results)
            if (r.status.completed) ok.push_back(&r);

        json jc;
        jc["epsilon"] = cfg.convergence.epsilon;
        jc["norm_tol"] = kConvergedNormTol;
        jc["replicates"] = R;
        jc["replicates_completed"] = ok.size();
        std::size_t converged = 0, inactive_late = 0;
        json finals = json::array(), excess = json::array(), late = json::array(),
             inactivity = json::array();
        for (const auto* r : ok) {
            converged += r->final_norm_error < kConvergedNormTol;
            inactive_late += r->late_projection_fraction == 0.0;
            finals.push_back(r->final_norm_error);
            excess.push_back(r->final_excess);
            late.push_back(r->late_projection_fraction);
            inactivity.push_back(r->inactivity_index ? json(*r->inactivity_index) : json());
        }
        jc["converged_count"] = converged;
        jc["projection_inactive_late_count"] = inactive_late;
        jc["final_norm_error"] = finals;
        jc["final_excess_risk"] = excess;
        jc["late_projection_fraction"] = late;
        jc["projection_inactivity_index"] = inactivity;

        CsvTable conv({"n", "frac_exceeding_eps", "V_mean", "eta_partial_sum"});
        const bool have_eta = !ok.empty() && std::all_of(ok.begin(), ok.end(), [](const auto* r) {
            return r->monitor.has_value();
        });
        if (!ok.empty()) {
            for (std::size_t j = 0; j < p.convergence_cps.size(); ++j) {
                double exceed = 0, v = 0, eta = 0;
                for (const auto* r : ok) {
                    exceed += r->excess_at_conv[j] > cfg.convergence.epsilon;
                    v += r->v_at_conv[j];
                    if (have_eta) eta += r->eta_prefix_at_conv[j];
                }
                const double k = static_cast<double>(ok.size());
                conv.cell(p.convergence_cps[j]).cell(exceed / k).cell(v / k);
                if (have_eta) conv.cell(eta / k);
                else conv.empty();
                conv.end_row();
            }
            double exceed_final = 0;
            for (const auto* r : ok) exceed_final += r->excess_at_conv.back() > cfg.convergence.epsilon;
            jc["final_frac_exceeding_eps"] = exceed_final / static_cast<double>(ok.size());
        }
        files.emplace_back("convergence.csv", conv.str());
        report["convergence"] = jc;

        if (have_eta) {
            std::vector<MonitorSeries> monitors;
            for (const auto* r : ok) monitors.push_back(*r->monitor);
            const auto mopts = monitor_options(cfg);
            log("Robbins-Siegmund recursion check");
            const auto rs = robbins_siegmund_check(monitors, mopts);
            report["robbins_siegmund"] = {{"recursion_violations", rs.recursion_violations},
                                          {"tested_points", rs.tested_points},
                                          {"violation_rate", rs.violation_rate()},
                                          {"max_recursion_excess", rs.max_recursion_excess},
                                          {"deterministic_mode", rs.deterministic_mode},
                                          {"beta_summable", rs.beta_summable},
                                          {"chi_summable", rs.chi_summable},
                                          {"V_converges", rs.V_converges},
                                          {"eta_series_bounded", rs.eta_series_bounded},
                                          {"v_converged_fraction", rs.v_converged_fraction},
                                          {"beta", summability_json(rs.beta)},
                                          {"chi", summability_json(rs.chi)},
                                          {"eta", summability_json(rs.eta)},
                                          {"burn_in", mopts.burn_in},
                                          {"notice", rs.notice},
                                          {"pass", rs.pass()}};
            const auto sm = supermartingale_test(monitors, mopts);
            report["supermartingale"] = {{"violations", sm.violations},
                                         {"tested_points", sm.tested_points},
                                         {"violation_rate", sm.violation_rate()},
                                         {"deterministic_mode", sm.deterministic_mode}};
        } else {
            report["robbins_siegmund"] = {
                {"skipped_reason",
                 "monitor decomposition needs a closed-form risk gradient (square loss on "
                 "linear-gaussian data) and a rate fit"}};
        }
    }

    // Collector: everything below runs on this thread only.
    for (const auto& r : results) {
        outcome.replicates.push_back(r.status);
        if (r.status.completed) files.emplace_back("trajectories/" + replicate_name(r.status.id), r.csv);
    }
    if (need_stability && !series.step_indices.empty()) {
        CsvTable st({"n", "gamma", "beta_hat", "ci", "m"});
        for (std::size_t i = 0; i < series.size(); ++i)
            st.cell(series.step_indices[i])
                .cell(series.gamma[i])
                .cell(series.beta_hat[i])
                .cell(series.ci_halfwidth[i])
                .cell(series.m_samples)
                .end_row();
        if (mode != Mode::Convergence) files.emplace_back("stability.csv", st.str());
    }

    if (cfg.emit_plots) {
        if (!series.step_indices.empty() && mode != Mode::Convergence) {
            PlotSpec ps{"CV_on gap estimate vs step size", "gamma_n", "beta_hat_n", 640, 440, {}};
            ps.series.push_back({"beta_hat", series.gamma, series.beta_hat, true, "#1f77b4"});
            if (fit) {
                PlotSeries line{"fit slope " + format_double(std::round(fit->slope * 1000) / 1000),
                                {}, {}, false, "#d62728"};
                for (const double g : series.gamma) {
                    line.x.push_back(g);
                    line.y.push_back(std::exp(fit->intercept) * std::pow(g, fit->slope));
                }
                ps.series.push_back(std::move(line));
            }
            files.emplace_back("plots/stability.svg", render_loglog(ps));
        }
        if (mode != Mode::Stability) {
            static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
            PlotSpec pn{"distance to f_K per replicate", "n", "||f_n - f_K||", 640, 440, {}};
            for (const auto& r : results) {
                if (!r.status.completed) continue;
                PlotSeries s{r.status.id < 10 ? "replicate " + std::to_string(r.status.id) : "",
                             {}, {}, false, palette[r.status.id % 10]};
                for (std::size_t j = 0; j < p.convergence_cps.size(); ++j) {
                    s.x.push_back(static_cast<double>(p.convergence_cps[j]));
                    s.y.push_back(r.norm_at_conv[j]);
                }
                pn.series.push_back(std::move(s));
            }
            files.emplace_back("plots/norm_error.svg", render_loglog(pn));
        }
    }

    const bool all_ok = std::all_of(outcome.replicates.begin(), outcome.replicates.end(),
                                    [](const auto& s) { return s.completed; });
    outcome.exit_code = all_ok && !phase_a_failed ? kExitOk : kExitDivergence;
    report["exit_code"] = outcome.exit_code;
    files.emplace_back("report.json", report.dump(2) + "\n");

    json manifest;
    manifest["tool"] = "sgdlab";
    manifest["version"] = SGDLAB_VERSION;
    manifest["mode"] = to_string(mode);
    manifest["config_sha256"] = report["config_sha256"];
    manifest["config"] = json::parse(canonical_json(cfg));
    manifest["base_seed"] = cfg.seed;
    json reps = json::array();
    for (const auto& s : outcome.replicates) {
        json j = {{"id", s.id}, {"seed", s.seed}, {"status", s.completed ? "completed" : "aborted"}};
        if (!s.completed) j["error"] = s.error;
        reps.push_back(j);
    }
    manifest["replicates"] = reps;
    manifest["all_completed"] = all_ok && !phase_a_failed;
    std::sort(files.begin(), files.end());
    json jf = json::array();
    for (const auto& [path, content] : files) {
        write_file(out_dir / path, content);
        jf.push_back({{"path", path}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
    manifest["files"] = jf;
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    log("wrote " + std::to_string(files.size() + 1) + " files to " + out_dir.string());

    outcome.report = std::move(report);
    outcome.manifest = std::move(manifest);
    return outcome;
}

SweepOutcome run_sweep(std::string_view config_text, std::string_view param,
                       const std::vector<std::string>& values, Mode mode, const fs::path& out_dir,
                       const ExecOptions& exec,
                       const std::function<void(ExperimentConfig&)>& adjust) {
    if (values.empty()) throw ConfigError(0, std::string(param), "sweep needs at least one value");
    std::vector<ExperimentConfig> cfgs;
    for (const auto& v : values) {
        ExperimentConfig c = parse_config(override_value(config_text, param, v));
        if (adjust) adjust(c);
        c.name += "[" + std::string(param) + "=" + v + "]";
        cfgs.push_back(std::move(c));
    }
    auto dir_name = [&](const std::string& v) {
        std::string s = std::string(param) + "=" + v;
        for (char& ch : s)
            if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '=' ||
                  ch == '-' || ch == '_'))
                ch = '_';
        return s;
    };

    SweepOutcome out;
    out.values = values;
    out.points.resize(values.size());
    const std::size_t outer = std::min(std::max<std::size_t>(exec.workers, 1), values.size());
    ExecOptions inner = exec;
    inner.workers = std::max<std::size_t>(1, exec.workers / outer);
    parallel_for(values.size(), outer, [&](std::size_t i) {
        out.points[i] = run_experiment(cfgs[i], mode, out_dir / dir_name(values[i]), inner);
    });

    json sm;
    sm["tool"] = "sgdlab";
    sm["version"] = SGDLAB_VERSION;
    sm["param"] = param;
    json pts = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& pt = out.points[i];
        const auto manifest_text = read_file(pt.out_dir / "manifest.json");
        json j = {{"value", values[i]},
                  {"dir", dir_name(values[i])},
                  {"config_sha256", pt.manifest["config_sha256"]},
                  {"manifest_sha256", sha256_hex(manifest_text)},
                  {"exit_code", pt.exit_code}};
        if (pt.report.contains("stability") && pt.report["stability"].contains("fit"))
            j["slope"] = pt.report["stability"]["fit"].is_null()
                             ? json()
                             : pt.report["stability"]["fit"]["slope"];
        pts.push_back(j);
        out.exit_code = std::max(out.exit_code, pt.exit_code);
    }
    sm["points"] = pts;
    write_file(out_dir / "sweep_manifest.json", sm.dump(2) + "\n");
    return out;
}

}  // namespace sgdlab::harness
