// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Usage: acceptance <path-to-sgdlab-cli> <work-dir>
//
// Drives the CLI on the default problem (and two negative controls), reads
// back the artifacts, and adds in-process oracle checks. Prints one
// PASS/FAIL line per criterion and exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdlab/constraint_sets.hpp"
#include "sgdlab/convergence_monitor.hpp"
#include "sgdlab/distribution.hpp"
#include "sgdlab/harness/config.hpp"
#include "sgdlab/harness/csv.hpp"
#include "sgdlab/losses.hpp"
#include "sgdlab/risk.hpp"
#include "sgdlab/stability_lab.hpp"

using namespace sgdlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    int id;
    std::string title;
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "" : "NOT ") + what);
    }
};

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(4);
    o << v;
    return o.str();
}

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json load_json(const fs::path& p) { return json::parse(harness::read_file(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(harness::read_file(p));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

Vector gaussian(std::mt19937_64& rng, Eigen::Index p, double s = 1.0) {
    std::normal_distribution<double> n(0.0, s);
    Vector v(p);
    for (auto& x : v) x = n(rng);
    return v;
}

// Nearest lattice point of K in [-R, R]^p (the simplex uses its own lattice).
double lattice_distance(const ConvexSet& set, const Vector& f, int steps, double R) {
    const Eigen::Index p = f.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    const bool simplex = set.kind() == SetKind::Simplex;
    const Eigen::Index free = simplex ? p - 1 : p;
    const double scale = simplex ? set.as<ConvexSet::Simplex>().scale : 0.0;
    while (true) {
        Vector g(p);
        bool ok = true;
        if (simplex) {
            int used = 0;
            for (Eigen::Index j = 0; j < free; ++j) {
                used += idx[static_cast<std::size_t>(j)];
                g[j] = scale * idx[static_cast<std::size_t>(j)] / steps;
            }
            ok = used <= steps;
            g[p - 1] = scale * (steps - used) / steps;
        } else {
            for (Eigen::Index j = 0; j < p; ++j) g[j] = -R + 2 * R * idx[static_cast<std::size_t>(j)] / steps;
            ok = contains(set, g, 0.0);
        }
        if (ok) best = std::min(best, (f - g).norm());
        Eigen::Index j = 0;
        while (j < free && ++idx[static_cast<std::size_t>(j)] > steps) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == free) break;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <sgdlab-cli> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argv[2];
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string base = harness::default_config_text();
    harness::write_file(work / "default.yaml", base);
    harness::write_file(work / "fast_steps.yaml",
                        harness::override_value(harness::override_value(base, "schedule.alpha", "1.5"),
                                                "name", "fast-steps"));
    std::string constant = harness::override_value(base, "schedule.a", "0.05");
    constant = harness::override_value(constant, "schedule.b", "0");
    constant = harness::override_value(constant, "schedule.alpha", "0");
    constant = harness::override_value(constant, "name", "constant-step");
    harness::write_file(work / "constant_step.yaml", constant);

    const auto t0 = std::chrono::steady_clock::now();
    const int rc1 = run_cli(cli, "run \"" + (work / "default.yaml").string() + "\" --out \"" +
                                     (work / "run_w1").string() + "\" --workers 1 -q > /dev/null");
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int rc2 = run_cli(cli, "run \"" + (work / "default.yaml").string() + "\" --out \"" +
                                     (work / "run_w2").string() + "\" --workers 2 --plots -q > /dev/null");
    const int rc3 = run_cli(cli, "convergence \"" + (work / "fast_steps.yaml").string() +
                                     "\" --allow-non-rm --out \"" + (work / "fast").string() +
                                     "\" -q > /dev/null");
    const int rc4 = run_cli(cli, "convergence \"" + (work / "constant_step.yaml").string() +
                                     "\" --allow-non-rm --out \"" + (work / "const").string() +
                                     "\" -q > /dev/null");
    if (rc1 != 0 || rc2 != 0 || rc3 != 0 || rc4 != 0) {
        std::cout << "FAIL [setup] CLI exit codes " << rc1 << " " << rc2 << " " << rc3 << " " << rc4
                  << "\n";
        return 1;
    }
    const fs::path run = work / "run_w1";
    const json report = load_json(run / "report.json");
    const json manifest = load_json(run / "manifest.json");
    const auto stab = read_csv(run / "stability.csv");
    std::vector<Verdict> verdicts;

    {
        Verdict v{1, "CV_on rate on the default problem"};
        const auto& fit = report["stability"]["fit"];
        const auto& cfg = manifest["config"];
        v.require(cfg["distribution"]["dimension"] == 10 && cfg["loss"] == "square" &&
                      cfg["schedule"]["alpha"] == 1.0 && cfg["schedule"]["a"] == 0.5 &&
                      cfg["n_steps"] == 100000 && cfg["stability"]["m"] == 10000 &&
                      report["problem"]["f_k_interior_margin_0_3"].get<bool>(),
                  "default problem (p=10, square, alpha=1, a=0.5, n=1e5, m=1e4, w* interior)");
        v.require(stab.size() == 20, "checkpoints=" + std::to_string(stab.size()) + " (20)");
        const double slope = fit["slope"], r2 = fit["r_squared"];
        v.require(slope >= 0.8 && slope <= 1.2, "slope=" + fmt(slope) + " in [0.8,1.2]");
        v.require(r2 >= 0.9, "r2=" + fmt(r2) + " >= 0.9");
        v.require(seconds < 120.0, "runtime=" + fmt(seconds) + "s < 120s single worker");
        verdicts.push_back(v);
    }
    {
        Verdict v{2, "stability sign"};
        std::size_t ok = 0;
        for (const auto& row : stab) ok += std::stod(row[2]) >= -std::stod(row[3]);
        v.require(ok == stab.size(),
                  std::to_string(ok) + "/" + std::to_string(stab.size()) + " beta_hat >= -ci");
        const double mean = report["stability"]["pooled_gap"]["mean"];
        const double ci = report["stability"]["pooled_gap"]["ci_halfwidth"];
        v.require(mean - ci > 0.0, "pooled=" + fmt(mean) + " +- " + fmt(ci) + " > 0 at 95%");
        verdicts.push_back(v);
    }
    {
        Verdict v{3, "convergence and negative controls"};
        const int ok = report["convergence"]["converged_count"];
        v.require(ok >= 18, "compliant: " + std::to_string(ok) + "/20 with ||f_n-f_K|| < 0.1");
        for (const auto& [name, dir] : {std::pair{"alpha=1.5", "fast"}, std::pair{"constant gamma", "const"}}) {
            const json r = load_json(work / dir / "report.json");
            const int c = r["convergence"]["converged_count"];
            const int total = r["convergence"]["replicates_completed"];
            v.require(total - c > total / 2, std::string(name) + ": " + std::to_string(total - c) + "/" +
                                                 std::to_string(total) + " fail the threshold");
        }
        verdicts.push_back(v);
    }
    {
        Verdict v{4, "projections inactive late in the run"};
        v.require(report["problem"]["f_k_interior_margin_0_3"].get<bool>(), "f_K interior with margin 0.3");
        const int inactive = report["convergence"]["projection_inactive_late_count"];
        v.require(inactive >= 18, std::to_string(inactive) + "/20 with zero activity over the final 50%");
        verdicts.push_back(v);
    }
    {
        Verdict v{5, "Taylor exactness and third-order remainder"};
        std::mt19937_64 rng(5);
        const auto sq = LossModel::square();
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vector f = gaussian(rng, 10);
            const Sample z{gaussian(rng, 10), gaussian(rng, 1)[0]};
            const double gamma = std::pow(10.0, -1.0 - 3.0 * std::uniform_real_distribution<double>()(rng));
            const auto t = taylor_decomposition(f, z, gamma, sq);
            worst = std::max(worst, std::abs(t.residual) /
                                        (std::abs(value(sq, f, z)) + t.first_term + std::abs(t.second_term)));
        }
        v.require(worst <= 1e-10, "square max relative residual=" + fmt(worst));
        const double gammas[] = {1e-2, 1e-3, 1e-4};
        double m[3] = {0, 0, 0};
        for (int i = 0; i < 500; ++i) {
            const Vector f = gaussian(rng, 10, 0.3);
            const Sample z{gaussian(rng, 10), rng() % 2 ? 1.0 : -1.0};
            for (int k = 0; k < 3; ++k)
                m[k] += std::abs(taylor_decomposition(f, z, gammas[k], LossModel::logistic()).residual);
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int k = 0; k < 3; ++k) {
            const double x = std::log(gammas[k]), y = std::log(m[k]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
        v.require(std::abs(slope - 3.0) <= 0.5, "logistic residual log-slope=" + fmt(slope) + " (3 +- 0.5)");
        verdicts.push_back(v);
    }
    {
        Verdict v{6, "converse bound with fitted C_hat"};
        const auto& cb = report["converse_bound"];
        const int sat = cb["satisfied"], vio = cb["violated"], skip = cb["skipped"];
        v.require(vio == 0 && sat > 0, std::to_string(sat) + " satisfied, " + std::to_string(vio) +
                                           " violated, " + std::to_string(skip) + " skipped");
        verdicts.push_back(v);
    }
    {
        Verdict v{7, "Robbins-Siegmund diagnostics"};
        MonitorSeries oracle;
        double V = 1.0;
        for (int n = 0; n < 2000; ++n) {
            const double b = std::ldexp(1.0, -n);
            oracle.V.push_back(V);
            oracle.beta.push_back(b);
            oracle.chi.push_back(b);
            oracle.eta.push_back(V / 4.0);
            V = V * (1.0 + b) + b - V / 4.0;
        }
        const std::vector<MonitorSeries> det = {oracle};
        v.require(robbins_siegmund_check(det).pass(), "deterministic oracle recursion passes all flags");

        const auto& rs = report["robbins_siegmund"];
        const double rate = rs["violation_rate"];
        v.require(rs["pass"].get<bool>() && rate <= 0.05,
                  "SGD monitor: violation rate=" + fmt(rate) + " <= 0.05, flags " +
                      (rs["pass"].get<bool>() ? "pass" : "fail"));

        MonitorSeries adv;
        for (int n = 0; n < 2000; ++n) {
            adv.V.push_back(static_cast<double>(n));
            adv.beta.push_back(0.0);
            adv.chi.push_back(0.0);
            adv.eta.push_back(0.0);
        }
        const std::vector<MonitorSeries> bad = {adv};
        const auto ra = robbins_siegmund_check(bad);
        const auto sa = supermartingale_test(bad);
        v.require(!ra.pass() && sa.violations == sa.tested_points && sa.tested_points > 0,
                  "adversarial Y_{n+1}=Y_n+1 fails (" + std::to_string(sa.violations) + "/" +
                      std::to_string(sa.tested_points) + " violations)");
        verdicts.push_back(v);
    }
    {
        Verdict v{8, "oracle cross-checks"};
        std::mt19937_64 rng(8);
        double fd = 0.0;
        for (const auto& loss : {LossModel::square(), LossModel::logistic()})
            for (int i = 0; i < 200; ++i) {
                Sample z{gaussian(rng, 6), rng() % 2 ? 1.0 : -1.0};
                fd = std::max(fd, check_gradient_fd(loss, gaussian(rng, 6), z, 1e-6));
            }
        v.require(fd < 1e-5, "gradient FD max error=" + fmt(fd));

        double excess = -std::numeric_limits<double>::infinity();
        for (Eigen::Index p = 1; p <= 3; ++p) {
            const int steps = p == 1 ? 4000 : p == 2 ? 400 : 60;
            const Vector c = Vector::Constant(p, 0.1);
            Vector n = Vector::Ones(p);
            n[0] = -1.5;
            for (const auto& set : {ConvexSet::whole_space(p), ConvexSet::ball(c, 1.2),
                                    ConvexSet::box(Vector::Constant(p, -0.7), Vector::Constant(p, 0.4)),
                                    ConvexSet::simplex(p, 1.0), ConvexSet::halfspace(n, 0.2)}) {
                for (int i = 0; i < 10; ++i) {
                    const Vector f = gaussian(rng, p, 1.5);
                    excess = std::max(excess, (f - project(set, f)).norm() - lattice_distance(set, f, steps, 3.0));
                }
            }
        }
        v.require(excess <= 1e-12, "projection vs grid search in p<=3: max excess=" + fmt(excess));

        const auto d = make_linear_gaussian(Vector::Constant(3, 0.4), 0.6);
        int agree = 0;
        for (int k = 0; k < 20; ++k) {
            const Vector f = gaussian(rng, 3);
            const std::uint64_t n = 1000000;
            double s = 0, s2 = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                const Sample z = draw(d, 500 + static_cast<std::uint64_t>(k), i);
                const double r = (z.y - f.dot(z.x)) * (z.y - f.dot(z.x));
                s += r, s2 += r * r;
            }
            const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
            agree += std::abs(mean - expected_risk(d, LossModel::square(), f).value) < 4 * se;
        }
        v.require(agree == 20, "closed-form vs Monte Carlo risk within 4 SE at " + std::to_string(agree) + "/20 points");

        const auto du = make_linear_gaussian(gaussian(rng, 5), 0.5);
        const Vector fk = true_minimizer(du, LossModel::square(), ConvexSet::whole_space(5));
        double gap = 0.0;
        for (int i = 0; i < 200; ++i) {
            const Vector f = gaussian(rng, 5, 2.0);
            const double e = norm_error(f, fk);
            gap = std::max(gap, std::abs(excess_risk(du, LossModel::square(), f, fk).value - e * e));
        }
        v.require(gap <= 1e-10, "excess_risk - norm_error^2 unconstrained: max=" + fmt(gap));
        verdicts.push_back(v);
    }
    {
        Verdict v{9, "determinism across worker counts"};
        std::size_t same = 0, total = 0;
        for (const auto& e : fs::recursive_directory_iterator(run)) {
            if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
            ++total;
            const auto other = work / "run_w2" / fs::relative(e.path(), run);
            same += fs::exists(other) && harness::read_file(e.path()) == harness::read_file(other);
        }
        v.require(total == 22 && same == total,
                  std::to_string(same) + "/" + std::to_string(total) + " CSVs byte-identical (workers 1 vs 2, plots off vs on)");
        verdicts.push_back(v);
    }

    bool all = true;
    for (const auto& v : verdicts) {
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << v.id << "] " << v.title << ": ";
        for (std::size_t i = 0; i < v.notes.size(); ++i) std::cout << (i ? "; " : "") << v.notes[i];
        std::cout << "\n";
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
