#pragma once

// JSON experiment configs: parsing with field-named diagnostics, and the
// canonical serialization written into run manifests.

#include "prmcc/errors.hpp"
#include "prmcc/simlab.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace prmcc {

using nlohmann::json;

struct TheoryOverlay {
    bool enabled = false;
    double target_error = 0.0;  ///< c for the iteration estimate; 0 means 1% of ||w||
};

struct SweepSpec {
    std::string parameter;  ///< "theta" or "lambda"; empty when absent
    std::vector<double> grid;
    std::string algorithm;
};

struct FileConfig {
    simlab::ExperimentConfig experiment;
    TheoryOverlay overlay;
    SweepSpec sweep;
    unsigned workers = 1;
};

namespace detail {

inline std::string join_path(const std::string& parent, const std::string& key)
{
    return parent.empty() ? key : parent + "." + key;
}

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) {
        throw config_error(where, "expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items()) {
        if (!ok.count(item.key())) {
            throw config_error(join_path(where, item.key()), "unknown field");
        }
    }
}

inline const json& need(const json& j, const std::string& where, const char* key)
{
    if (!j.contains(key)) {
        throw config_error(join_path(where, key), "missing required field");
    }
    return j.at(key);
}

inline double number(const json& j, const std::string& field)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") {
            return std::numeric_limits<double>::infinity();
        }
    }
    if (!j.is_number()) {
        throw config_error(field, "expected a number");
    }
    return j.get<double>();
}

inline double number_or(const json& j, const std::string& where, const char* key, double fallback)
{
    return j.contains(key) ? number(j.at(key), join_path(where, key)) : fallback;
}

inline std::uint64_t count(const json& j, const std::string& field)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw config_error(field, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline Eigen::VectorXd vector(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) {
        throw config_error(field, "expected a non-empty array of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = number(j[i], field + "[" + std::to_string(i) + "]");
    }
    return v;
}

/// Either a full "weights" array, or "taps" plus sparse "nonzero" [[index, value], ...].
inline Eigen::VectorXd weights(const json& j, const std::string& where, std::size_t taps_hint = 0)
{
    if (j.contains("weights")) {
        return vector(j.at("weights"), join_path(where, "weights"));
    }
    std::size_t n = taps_hint;
    if (j.contains("taps")) {
        n = count(j.at("taps"), join_path(where, "taps"));
    }
    if (n == 0) {
        throw config_error(join_path(where, "weights"), "missing required field");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const std::string field = join_path(where, "nonzero");
    const json& nz = need(j, where, "nonzero");
    if (!nz.is_array()) {
        throw config_error(field, "expected an array of [index, value] pairs");
    }
    for (std::size_t i = 0; i < nz.size(); ++i) {
        const std::string at = field + "[" + std::to_string(i) + "]";
        if (!nz[i].is_array() || nz[i].size() != 2) {
            throw config_error(at, "expected an [index, value] pair");
        }
        const std::uint64_t k = count(nz[i][0], at);
        if (k >= n) {
            throw config_error(at, "index out of range");
        }
        w[static_cast<Eigen::Index>(k)] = number(nz[i][1], at);
    }
    return w;
}

inline simlab::SystemModel parse_system(const json& j)
{
    const std::string where = "system";
    if (!j.is_object()) {
        throw config_error(where, "expected an object");
    }
    const json& type = need(j, where, "type");
    const std::string kind = type.is_string() ? type.get<std::string>() : std::string();
    if (kind == "static") {
        only_keys(j, where, {"type", "weights", "taps", "nonzero"});
        return simlab::StaticSystem{weights(j, where)};
    }
    if (kind == "random_walk") {
        only_keys(j, where, {"type", "weights", "taps", "nonzero", "sigma_q2"});
        return simlab::RandomWalkSystem{weights(j, where),
                                        number(need(j, where, "sigma_q2"), "system.sigma_q2")};
    }
    if (kind == "staged") {
        only_keys(j, where, {"type", "taps", "stages"});
        simlab::StagedSystem s;
        s.taps = count(need(j, where, "taps"), "system.taps");
        const json& stages = need(j, where, "stages");
        if (!stages.is_array()) {
            throw config_error("system.stages", "expected an array");
        }
        for (std::size_t i = 0; i < stages.size(); ++i) {
            const std::string at = "system.stages[" + std::to_string(i) + "]";
            const json& st = stages[i];
            only_keys(st, at, {"start", "nonzeros", "weights", "nonzero"});
            simlab::Stage stage;
            stage.start = count(need(st, at, "start"), at + ".start");
            if (st.contains("nonzeros")) {
                stage.weights = simlab::RandomSparseWeights{count(st.at("nonzeros"), at + ".nonzeros")};
            } else {
                stage.weights = weights(st, at, s.taps);
            }
            s.stages.push_back(std::move(stage));
        }
        return s;
    }
    throw config_error("system.type", "expected one of static, random_walk, staged");
}

inline NoiseModel parse_noise(const json& j)
{
    const std::string where = "noise";
    if (!j.is_object()) {
        throw config_error(where, "expected an object");
    }
    const json& type = need(j, where, "type");
    const std::string kind = type.is_string() ? type.get<std::string>() : std::string();
    if (kind == "gaussian") {
        only_keys(j, where, {"type", "variance"});
        return GaussianNoise{number(need(j, where, "variance"), "noise.variance")};
    }
    if (kind == "mixed_gaussian") {
        only_keys(j, where, {"type", "p1", "variance1", "p2", "variance2"});
        MixedGaussianNoise m;
        m.p1 = number(need(j, where, "p1"), "noise.p1");
        m.variance1 = number(need(j, where, "variance1"), "noise.variance1");
        m.p2 = number_or(j, where, "p2", 1.0 - m.p1);
        m.variance2 = number(need(j, where, "variance2"), "noise.variance2");
        return m;
    }
    if (kind == "uniform") {
        only_keys(j, where, {"type", "half_width"});
        return UniformNoise{number(need(j, where, "half_width"), "noise.half_width")};
    }
    throw config_error("noise.type", "expected one of gaussian, mixed_gaussian, uniform");
}

inline simlab::AlgorithmSpec parse_algorithm(const json& j, std::size_t index)
{
    const std::string where = "algorithms[" + std::to_string(index) + "]";
    const json& name = need(j, where, "name");
    const auto kind = name.is_string() ? simlab::parse_algorithm(name.get<std::string>()) : std::nullopt;
    if (!kind) {
        throw config_error(where + ".name",
                           "expected one of lms, mcc, rls, rmcc, prls, prmcc, iplms, ipmcc, cprmcc");
    }
    simlab::AlgorithmSpec s;
    s.kind = *kind;
    s.label = j.contains("label") && j.at("label").is_string() ? j.at("label").get<std::string>()
                                                               : name.get<std::string>();
    using simlab::Algorithm;
    switch (*kind) {
    case Algorithm::lms:
    case Algorithm::iplms:
    case Algorithm::mcc:
    case Algorithm::ipmcc: {
        if (*kind == Algorithm::lms || *kind == Algorithm::iplms) {
            only_keys(j, where, {"name", "label", "mu", "alpha", "epsilon"});
        } else {
            only_keys(j, where, {"name", "label", "mu", "sigma", "alpha", "epsilon"});
        }
        s.gradient.mu = number_or(j, where, "mu", s.gradient.mu);
        s.gradient.sigma = number_or(j, where, "sigma", kInfiniteBandwidth);
        s.gradient.alpha = number_or(j, where, "alpha", s.gradient.alpha);
        s.gradient.epsilon = number_or(j, where, "epsilon", s.gradient.epsilon);
        break;
    }
    case Algorithm::rls:
    case Algorithm::prls:
    case Algorithm::rmcc:
    case Algorithm::prmcc:
    case Algorithm::cprmcc: {
        if (*kind == Algorithm::cprmcc) {
            only_keys(j, where, {"name", "label", "lambda", "delta", "sigma", "alpha", "epsilon", "theta1",
                                 "theta2", "mu_b", "sigma_b", "b_plus", "beta", "gamma", "transfer"});
        } else if (*kind == Algorithm::rls || *kind == Algorithm::rmcc) {
            only_keys(j, where, {"name", "label", "lambda", "delta", "sigma"});
        } else {
            only_keys(j, where, {"name", "label", "lambda", "delta", "sigma", "theta", "alpha", "epsilon"});
        }
        auto& r = s.recursive;
        r.lambda = number_or(j, where, "lambda", r.lambda);
        r.delta = number_or(j, where, "delta", r.delta);
        r.sigma = number_or(j, where, "sigma", kInfiniteBandwidth);
        r.theta = number_or(j, where, "theta", r.theta);
        r.alpha = number_or(j, where, "alpha", r.alpha);
        r.epsilon = number_or(j, where, "epsilon", r.epsilon);
        if (*kind == Algorithm::cprmcc) {
            s.theta1 = number_or(j, where, "theta1", s.theta1);
            s.theta2 = number_or(j, where, "theta2", s.theta2);
            auto& c = s.combiner;
            c.mu_b = number_or(j, where, "mu_b", c.mu_b);
            c.sigma_b = number_or(j, where, "sigma_b", c.sigma_b);
            c.b_plus = number_or(j, where, "b_plus", c.b_plus);
            c.beta = number_or(j, where, "beta", c.beta);
            c.gamma = number_or(j, where, "gamma", c.gamma);
            if (j.contains("transfer")) {
                if (!j.at("transfer").is_boolean()) {
                    throw config_error(where + ".transfer", "expected a boolean");
                }
                c.transfer_enabled = j.at("transfer").get<bool>();
            }
        }
        break;
    }
    }
    return s;
}

inline json number_json(double v)
{
    if (std::isinf(v)) {
        return "inf";
    }
    return v;
}

inline json vector_json(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

}  // namespace detail

/// Parses a config document. Throws config_error naming the offending field.
inline FileConfig parse_config(const json& j)
{
    using namespace detail;
    only_keys(j, "", {"system", "input", "noise", "algorithms", "run", "theory_overlay", "sweep"});
    FileConfig fc;
    auto& c = fc.experiment;
    c.system = parse_system(need(j, "", "system"));
    if (j.contains("input")) {
        only_keys(j.at("input"), "input", {"variance"});
        c.input_variance = number_or(j.at("input"), "input", "variance", 1.0);
    }
    c.noise = parse_noise(need(j, "", "noise"));
    const json& algos = need(j, "", "algorithms");
    if (!algos.is_array()) {
        throw config_error("algorithms", "expected an array");
    }
    for (std::size_t i = 0; i < algos.size(); ++i) {
        c.algorithms.push_back(parse_algorithm(algos[i], i));
    }
    const json& run = need(j, "", "run");
    only_keys(run, "run", {"iterations", "trials", "seed", "steady_window_fraction", "workers"});
    c.iterations = count(need(run, "run", "iterations"), "run.iterations");
    c.trials = count(need(run, "run", "trials"), "run.trials");
    c.seed = run.contains("seed") ? count(run.at("seed"), "run.seed") : 1;
    c.steady_window_fraction = number_or(run, "run", "steady_window_fraction", 0.1);
    if (run.contains("workers")) {
        fc.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, count(run.at("workers"), "run.workers")));
    }
    if (j.contains("theory_overlay")) {
        const json& t = j.at("theory_overlay");
        only_keys(t, "theory_overlay", {"enabled", "target_error"});
        if (t.contains("enabled")) {
            if (!t.at("enabled").is_boolean()) {
                throw config_error("theory_overlay.enabled", "expected a boolean");
            }
            fc.overlay.enabled = t.at("enabled").get<bool>();
        }
        fc.overlay.target_error = number_or(t, "theory_overlay", "target_error", 0.0);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        only_keys(s, "sweep", {"parameter", "grid", "algorithm"});
        if (s.contains("parameter")) {
            if (!s.at("parameter").is_string()) {
                throw config_error("sweep.parameter", "expected \"theta\" or \"lambda\"");
            }
            fc.sweep.parameter = s.at("parameter").get<std::string>();
        }
        if (s.contains("grid")) {
            const Eigen::VectorXd g = vector(s.at("grid"), "sweep.grid");
            fc.sweep.grid.assign(g.data(), g.data() + g.size());
        }
        if (s.contains("algorithm") && s.at("algorithm").is_string()) {
            fc.sweep.algorithm = s.at("algorithm").get<std::string>();
        }
    }
    simlab::validate(c);
    return fc;
}

/// Reads a config file, or a run manifest (its "config" member is used).
inline FileConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw config_error("config", "cannot open '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config", std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("config_hash")) {
        return parse_config(j.at("config"));
    }
    return parse_config(j);
}

/// Fully explicit serialization: every hyperparameter present, including defaults.
inline json to_json(const FileConfig& fc)
{
    using namespace detail;
    const auto& c = fc.experiment;
    json j;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, simlab::StaticSystem>) {
                j["system"] = {{"type", "static"}, {"weights", vector_json(m.w)}};
            } else if constexpr (std::is_same_v<T, simlab::RandomWalkSystem>) {
                j["system"] = {{"type", "random_walk"}, {"weights", vector_json(m.w0)}, {"sigma_q2", m.sigma_q2}};
            } else {
                json stages = json::array();
                for (const auto& st : m.stages) {
                    json s = {{"start", st.start}};
                    if (const auto* w = std::get_if<Eigen::VectorXd>(&st.weights)) {
                        s["weights"] = vector_json(*w);
                    } else {
                        s["nonzeros"] = std::get<simlab::RandomSparseWeights>(st.weights).nonzeros;
                    }
                    stages.push_back(s);
                }
                j["system"] = {{"type", "staged"}, {"taps", m.taps}, {"stages", stages}};
            }
        },
        c.system);
    j["input"] = {{"variance", c.input_variance}};
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                j["noise"] = {{"type", "gaussian"}, {"variance", m.variance}};
            } else if constexpr (std::is_same_v<T, MixedGaussianNoise>) {
                j["noise"] = {{"type", "mixed_gaussian"}, {"p1", m.p1},         {"variance1", m.variance1},
                              {"p2", m.p2},               {"variance2", m.variance2}};
            } else {
                j["noise"] = {{"type", "uniform"}, {"half_width", m.half_width}};
            }
        },
        c.noise);
    json algos = json::array();
    using simlab::Algorithm;
    for (const auto& s : c.algorithms) {
        json a = {{"name", simlab::to_string(s.kind)}, {"label", s.label}};
        if (!simlab::is_recursive(s.kind)) {
            const GradientConfig g = s.effective_gradient();
            a["mu"] = g.mu;
            if (s.kind == Algorithm::mcc || s.kind == Algorithm::ipmcc) {
                a["sigma"] = number_json(g.sigma);
            }
            if (s.kind == Algorithm::iplms || s.kind == Algorithm::ipmcc) {
                a["alpha"] = g.alpha;
                a["epsilon"] = g.epsilon;
            }
        } else {
            const RecursiveConfig r = s.effective_recursive();
            a["lambda"] = r.lambda;
            a["delta"] = r.delta;
            if (s.kind != Algorithm::rls && s.kind != Algorithm::prls) {
                a["sigma"] = number_json(r.sigma);
            }
            if (s.kind == Algorithm::prls || s.kind == Algorithm::prmcc || s.kind == Algorithm::cprmcc) {
                if (s.kind != Algorithm::cprmcc) {
                    a["theta"] = r.theta;
                }
                a["alpha"] = r.alpha;
                a["epsilon"] = r.epsilon;
            }
            if (s.kind == Algorithm::cprmcc) {
                a["theta1"] = s.theta1;
                a["theta2"] = s.theta2;
                a["mu_b"] = s.combiner.mu_b;
                a["sigma_b"] = s.combiner.sigma_b;
                a["b_plus"] = s.combiner.b_plus;
                a["beta"] = s.combiner.beta;
                a["gamma"] = s.combiner.gamma;
                a["transfer"] = s.combiner.transfer_enabled;
            }
        }
        algos.push_back(a);
    }
    j["algorithms"] = algos;
    j["run"] = {{"iterations", c.iterations},
                {"trials", c.trials},
                {"seed", c.seed},
                {"steady_window_fraction", c.steady_window_fraction}};
    j["theory_overlay"] = {{"enabled", fc.overlay.enabled}, {"target_error", fc.overlay.target_error}};
    if (!fc.sweep.parameter.empty() || !fc.sweep.grid.empty()) {
        j["sweep"] = {{"parameter", fc.sweep.parameter}, {"grid", fc.sweep.grid}};
        if (!fc.sweep.algorithm.empty()) {
            j["sweep"]["algorithm"] = fc.sweep.algorithm;
        }
    }
    return j;
}

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
inline std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace prmcc
