// SPDX-License-Identifier: Apache-2.0
#include "sgdlab/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sgdlab::harness {

namespace {

int line_of(const YAML::Node& n) {
    const auto m = n.Mark();
    return m.line >= 0 ? m.line + 1 : 0;
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Reads one YAML map, remembering which keys were consumed and where each
// field lives so that later validation errors can cite a line.
class MapReader {
public:
    MapReader(YAML::Node node, std::string path, std::map<std::string, int>& lines)
        : node_(std::move(node)), path_(std::move(path)), lines_(lines) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(line_of(node_), path_, "expected a mapping");
    }

    YAML::Node child(const std::string& key) {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) return {};
        YAML::Node c = node_[key];
        if (c) lines_[join(path_, key)] = line_of(c);
        return c;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        const YAML::Node c = child(key);
        if (c && !c.IsNull()) out = convert<T>(c, join(path_, key));
    }

    MapReader sub(const std::string& key) { return MapReader(child(key), join(path_, key), lines_); }

    void finish() const {
        if (!node_ || node_.IsNull()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key))
                throw ConfigError(line_of(kv.first), join(path_, key), "unknown key");
        }
    }

    template <class T>
    static T convert(const YAML::Node& n, const std::string& field) {
        if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!n.IsSequence()) throw ConfigError(line_of(n), field, "expected a list of numbers");
            std::vector<double> out;
            for (const auto& e : n) out.push_back(convert<double>(e, field));
            return out;
        } else {
            if (!n.IsScalar()) throw ConfigError(line_of(n), field, "expected a scalar");
            try {
                if constexpr (std::is_same_v<T, std::string>) {
                    return n.as<std::string>();
                } else if constexpr (std::is_same_v<T, bool>) {
                    return n.as<bool>();
                } else if constexpr (std::is_floating_point_v<T>) {
                    const double v = n.as<double>();
                    if (!std::isfinite(v)) throw ConfigError(line_of(n), field, "must be finite");
                    return v;
                } else {
                    const auto v = n.as<long long>();
                    if (v < 0) throw ConfigError(line_of(n), field, "must be >= 0");
                    return static_cast<T>(v);
                }
            } catch (const YAML::BadConversion&) {
                throw ConfigError(line_of(n), field,
                                  "malformed value '" + n.Scalar() + "'");
            }
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::map<std::string, int>& lines_;
    std::set<std::string> seen_;
};

DistributionKind parse_distribution_kind(const std::string& s, int line) {
    if (s == "linear-gaussian") return DistributionKind::LinearGaussian;
    if (s == "logistic-gaussian") return DistributionKind::LogisticGaussian;
    throw ConfigError(line, "distribution.kind",
                      "unknown distribution '" + s + "' (linear-gaussian | logistic-gaussian)");
}

LossKind parse_loss_kind(const std::string& s, int line) {
    if (s == "square") return LossKind::Square;
    if (s == "logistic") return LossKind::Logistic;
    if (s == "hinge") return LossKind::Hinge;
    throw ConfigError(line, "loss", "unknown loss '" + s + "' (square | logistic | hinge)");
}

SetKind parse_set_kind(const std::string& s, int line) {
    if (s == "whole-space") return SetKind::WholeSpace;
    if (s == "ball") return SetKind::Ball;
    if (s == "box") return SetKind::Box;
    if (s == "simplex") return SetKind::Simplex;
    if (s == "halfspace") return SetKind::Halfspace;
    throw ConfigError(line, "constraint.kind",
                      "unknown set '" + s + "' (whole-space | ball | box | simplex | halfspace)");
}

void validate(const ExperimentConfig& c, const std::map<std::string, int>& lines) {
    auto fail = [&](const std::string& field, const std::string& what) {
        const auto it = lines.find(field);
        throw ConfigError(it == lines.end() ? 0 : it->second, field, what);
    };
    if (c.n_steps < 1) fail("n_steps", "must be >= 1");
    if (c.replicates < 1) fail("replicates", "must be >= 1");
    if (c.distribution.dimension < 1) fail("distribution.dimension", "must be >= 1");
    if (!c.distribution.w_star.empty() &&
        static_cast<Eigen::Index>(c.distribution.w_star.size()) != c.distribution.dimension)
        fail("distribution.w_star", "length must equal distribution.dimension");
    if (c.distribution.noise_sigma < 0.0) fail("distribution.noise_sigma", "must be >= 0");
    if (!(c.a > 0.0)) fail("schedule.a", "must be > 0");
    if (c.b < 0.0) fail("schedule.b", "must be >= 0");
    if (c.alpha < 0.0) fail("schedule.alpha", "must be >= 0");
    const auto rm = robbins_monro_check(c.schedule());
    if (!rm.pass && !c.allow_non_rm)
        fail("schedule.alpha",
             std::string("schedule violates the Robbins-Monro condition (") +
                 (rm.divergent_sum ? "sum of gamma_n^2 diverges" : "sum of gamma_n converges") +
                 "); set allow_non_rm: true to run it as a negative control");
    if (c.stability.m < 2) fail("stability.m", "must be >= 2");
    if (c.stability.checkpoints < 1) fail("stability.checkpoints", "must be >= 1");
    if (c.stability.first_checkpoint < 1) fail("stability.first_checkpoint", "must be >= 1");
    if (c.stability.first_checkpoint >= c.n_steps)
        fail("stability.first_checkpoint", "must be < n_steps");
    if (!(c.convergence.epsilon > 0.0)) fail("convergence.epsilon", "must be > 0");
    if (c.convergence.bins < 1) fail("convergence.bins", "must be >= 1");
    if (c.convergence.min_per_bin < 1) fail("convergence.min_per_bin", "must be >= 1");
    if (c.constants.probes < 1) fail("constants.probes", "must be >= 1");
    if (!(c.constants.radius > 0.0)) fail("constants.radius", "must be > 0");
    if (c.recording.per_decade < 1) fail("recording.per_decade", "must be >= 1");

    const auto& k = c.constraint;
    const auto p = static_cast<std::size_t>(c.distribution.dimension);
    if (!k.center.empty() && k.center.size() != p)
        fail("constraint.center", "length must equal distribution.dimension");
    if (k.kind == SetKind::Ball && !(k.radius > 0.0)) fail("constraint.radius", "must be > 0");
    if (k.kind == SetKind::Box && k.lo > k.hi) fail("constraint.lo", "must be <= constraint.hi");
    if (k.kind == SetKind::Simplex && !(k.scale > 0.0)) fail("constraint.scale", "must be > 0");
    if (k.kind == SetKind::Halfspace) {
        if (!k.normal.empty() && k.normal.size() != p)
            fail("constraint.normal", "length must equal distribution.dimension");
        if (!k.normal.empty() &&
            std::all_of(k.normal.begin(), k.normal.end(), [](double v) { return v == 0.0; }))
            fail("constraint.normal", "must be nonzero");
    }
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

DataDistribution ExperimentConfig::make_distribution() const {
    const Eigen::Index p = distribution.dimension;
    const Vector w = distribution.w_star.empty()
                         ? Vector(Vector::Constant(p, distribution.w_star_norm /
                                                         std::sqrt(static_cast<double>(p))))
                         : to_vector(distribution.w_star);
    if (distribution.kind == DistributionKind::LogisticGaussian)
        return DataDistribution::logistic_gaussian(w);
    return DataDistribution::linear_gaussian(w, distribution.noise_sigma);
}

LossModel ExperimentConfig::make_loss() const {
    switch (loss) {
        case LossKind::Square: return LossModel::square();
        case LossKind::Logistic: return LossModel::logistic();
        case LossKind::Hinge: return LossModel::hinge();
    }
    return LossModel::square();
}

ConvexSet ExperimentConfig::make_constraint() const {
    const Eigen::Index p = distribution.dimension;
    const auto& k = constraint;
    switch (k.kind) {
        case SetKind::WholeSpace: return ConvexSet::whole_space(p);
        case SetKind::Ball:
            return ConvexSet::ball(k.center.empty() ? Vector(Vector::Zero(p)) : to_vector(k.center),
                                   k.radius);
        case SetKind::Box:
            return ConvexSet::box(Vector::Constant(p, k.lo), Vector::Constant(p, k.hi));
        case SetKind::Simplex: return ConvexSet::simplex(p, k.scale);
        case SetKind::Halfspace: {
            Vector n = Vector::Zero(p);
            if (k.normal.empty()) n[0] = 1.0;
            else n = to_vector(k.normal);
            return ConvexSet::halfspace(n, k.offset);
        }
    }
    return ConvexSet::whole_space(p);
}

ExperimentConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.mark.line + 1, "", "malformed document: " + e.msg);
    }
    std::map<std::string, int> lines;
    ExperimentConfig c;
    MapReader top(root, "", lines);
    top.read("name", c.name);
    top.read("seed", c.seed);
    top.read("replicates", c.replicates);
    top.read("n_steps", c.n_steps);
    top.read("allow_non_rm", c.allow_non_rm);
    top.read("risk_mc_draws", c.risk_mc_draws);
    std::size_t workers_unused = 0;
    top.read("workers", workers_unused);

    {
        MapReader d = top.sub("distribution");
        std::string kind = "linear-gaussian";
        d.read("kind", kind);
        c.distribution.kind = parse_distribution_kind(kind, lines["distribution.kind"]);
        std::size_t dim = static_cast<std::size_t>(c.distribution.dimension);
        d.read("dimension", dim);
        c.distribution.dimension = static_cast<Eigen::Index>(dim);
        d.read("w_star", c.distribution.w_star);
        d.read("w_star_norm", c.distribution.w_star_norm);
        d.read("noise_sigma", c.distribution.noise_sigma);
        d.finish();
    }
    {
        std::string loss = "square";
        top.read("loss", loss);
        c.loss = parse_loss_kind(loss, lines["loss"]);
    }
    {
        MapReader k = top.sub("constraint");
        std::string kind = "ball";
        k.read("kind", kind);
        c.constraint.kind = parse_set_kind(kind, lines["constraint.kind"]);
        k.read("center", c.constraint.center);
        k.read("radius", c.constraint.radius);
        k.read("lo", c.constraint.lo);
        k.read("hi", c.constraint.hi);
        k.read("scale", c.constraint.scale);
        k.read("normal", c.constraint.normal);
        k.read("offset", c.constraint.offset);
        k.finish();
    }
    {
        MapReader s = top.sub("schedule");
        s.read("a", c.a);
        s.read("b", c.b);
        s.read("alpha", c.alpha);
        s.finish();
    }
    {
        MapReader s = top.sub("stability");
        s.read("m", c.stability.m);
        s.read("checkpoints", c.stability.checkpoints);
        s.read("first_checkpoint", c.stability.first_checkpoint);
        s.finish();
    }
    {
        MapReader s = top.sub("convergence");
        s.read("epsilon", c.convergence.epsilon);
        s.read("bins", c.convergence.bins);
        s.read("min_per_bin", c.convergence.min_per_bin);
        s.read("z", c.convergence.z);
        s.read("max_test_points", c.convergence.max_test_points);
        std::uint64_t burn = 0;
        if (const YAML::Node b = s.child("burn_in"); b && !b.IsNull()) {
            s.read("burn_in", burn);
            c.convergence.burn_in = burn;
        }
        s.finish();
    }
    {
        MapReader s = top.sub("constants");
        s.read("probes", c.constants.probes);
        s.read("radius", c.constants.radius);
        s.read("inner_draws", c.constants.inner_draws);
        s.finish();
    }
    {
        MapReader s = top.sub("recording");
        s.read("dense_until", c.recording.dense_until);
        std::size_t per_decade = static_cast<std::size_t>(c.recording.per_decade);
        s.read("per_decade", per_decade);
        c.recording.per_decade = static_cast<int>(per_decade);
        s.finish();
    }
    {
        MapReader s = top.sub("output");
        s.read("dir", c.output_dir);
        s.read("plots", c.emit_plots);
        s.finish();
    }
    top.finish();
    validate(c, lines);
    return c;
}

std::string override_value(std::string_view text, std::string_view path, std::string_view value) {
    YAML::Node root = YAML::Load(std::string(text));
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    std::vector<std::string> parts;
    std::stringstream ss{std::string(path)};
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) throw ConfigError(0, std::string(path), "empty parameter path");

    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!cur[parts[i]] || !cur[parts[i]].IsMap())
            cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
        YAML::Node next = cur[parts[i]];
        cur.reset(next);
    }
    cur[parts.back()] = YAML::Load(std::string(value));
    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

std::string canonical_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["replicates"] = c.replicates;
    j["n_steps"] = c.n_steps;
    j["allow_non_rm"] = c.allow_non_rm;
    j["risk_mc_draws"] = c.risk_mc_draws;
    j["distribution"] = {{"kind", to_string(c.distribution.kind)},
                         {"dimension", c.distribution.dimension},
                         {"w_star", c.distribution.w_star},
                         {"w_star_norm", c.distribution.w_star_norm},
                         {"noise_sigma", c.distribution.noise_sigma}};
    j["loss"] = to_string(c.loss);
    j["constraint"] = {{"kind", to_string(c.constraint.kind)}, {"center", c.constraint.center},
                       {"radius", c.constraint.radius},      {"lo", c.constraint.lo},
                       {"hi", c.constraint.hi},              {"scale", c.constraint.scale},
                       {"normal", c.constraint.normal},      {"offset", c.constraint.offset}};
    j["schedule"] = {{"a", c.a}, {"b", c.b}, {"alpha", c.alpha}};
    j["stability"] = {{"m", c.stability.m},
                      {"checkpoints", c.stability.checkpoints},
                      {"first_checkpoint", c.stability.first_checkpoint}};
    j["convergence"] = {{"epsilon", c.convergence.epsilon},
                        {"bins", c.convergence.bins},
                        {"min_per_bin", c.convergence.min_per_bin},
                        {"z", c.convergence.z},
                        {"max_test_points", c.convergence.max_test_points},
                        {"burn_in", c.convergence.burn_in ? json(*c.convergence.burn_in) : json()}};
    j["constants"] = {{"probes", c.constants.probes},
                      {"radius", c.constants.radius},
                      {"inner_draws", c.constants.inner_draws}};
    j["recording"] = {{"dense_until", c.recording.dense_until},
                      {"per_decade", c.recording.per_decade}};
    return j.dump();
}

std::string default_config_text() {
    return R"(# Default problem: p = 10, square loss, w* interior to a ball.
name: default
seed: 1
replicates: 20
n_steps: 100000
allow_non_rm: false
distribution:
  kind: linear-gaussian
  dimension: 10
  w_star_norm: 1.0
  noise_sigma: 0.5
loss: square
constraint:
  kind: ball
  radius: 2.0
schedule:
  a: 0.5
  b: 1.0
  alpha: 1.0
stability:
  m: 10000
  checkpoints: 20
  first_checkpoint: 100
convergence:
  epsilon: 0.05
constants:
  probes: 200
  radius: 2.0
  inner_draws: 1000
output:
  plots: false
)";
}

}  // namespace sgdlab::harness
