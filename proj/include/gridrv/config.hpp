#pragma once

// Run configuration, read from and written back to JSON. Every output file
// embeds the normalized configuration so it can be regenerated.
//
// Units: times in model time units, prices in price units, epsilon is
// dimensionless (cell width c * epsilon in price units), volatility in price
// per sqrt(time), intensity in jumps per unit time.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridrv/errors.hpp"
#include "gridrv/grid.hpp"
#include "gridrv/model.hpp"
#include "gridrv/path.hpp"
#include "gridrv/path_sim.hpp"

namespace gridrv {

using json = nlohmann::json;

struct DensityTableOptions {
    double c = 1.0;
    double sigma = 1.0;
    std::size_t y_points = 4097;
    std::size_t z_points = 1201;
    double z_max = 6.0; ///< in units of c^2 / sigma^2
};

struct RunConfig {
    ModelSpec model;
    double c = 1.0;
    std::vector<double> epsilons{0.005};
    SchemeKind scheme = SchemeKind::exact;
    std::optional<double> delta; ///< Euler step; default (c eps)^2 / (100 sup sigma^2)
    double t = 1.0;              ///< evaluation time
    std::size_t replications = 10000;
    std::size_t limit_draws = 1000000;
    std::uint64_t seed = 1;
    unsigned workers = 0; ///< 0 = available parallelism
    double tol = 1e-8;
    std::string out = "out";
    DensityTableOptions density;

    GridScheme grid(double epsilon) const { return {epsilon, c}; }
    GridScheme grid() const { return grid(epsilons.back()); }

    double euler_step(const GridScheme& g) const { return delta ? *delta : default_euler_step(model, g); }

    void validate() const
    {
        model.validate();
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("grid.c must be positive");
        if (epsilons.empty()) throw ConfigError("grid needs epsilon or epsilons");
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i])) throw ConfigError("grid epsilons must be positive");
            if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("grid.epsilons must be strictly decreasing");
        }
        if (scheme == SchemeKind::embedded) throw ConfigError("scheme 'embedded' cannot be simulated; valid choices: exact, euler-bridge");
        if (scheme == SchemeKind::exact && !model.drift.identically_zero()) {
            throw UnsupportedScheme("exact scheme requires zero drift; use euler-bridge");
        }
        if (delta) {
            if (!(*delta > 0.0) || !std::isfinite(*delta)) throw ConfigError("delta must be positive");
            for (double e : epsilons) {
                if (*delta > max_euler_step(model, grid(e)) * (1.0 + 1e-12)) {
                    throw ConfigError("delta too large: need delta <= (c eps)^2 / (50 sup sigma^2) for every epsilon");
                }
            }
        }
        if (!(t > 0.0) || t > model.horizon) throw ConfigError("t must lie in (0, horizon]");
        if (replications < 100) throw ConfigError("replications must be at least 100");
        if (limit_draws < 1) throw ConfigError("limit_draws must be positive");
        if (!(tol > 0.0) || tol > 1e-2) throw ConfigError("tol must lie in (0, 1e-2]");
        if (!(density.c > 0.0) || !(density.sigma > 0.0)) throw ConfigError("density_table c and sigma must be positive");
        if (density.y_points < 3 || density.z_points < 3) throw ConfigError("density_table needs at least 3 points");
        if (!(density.z_max > 0.0)) throw ConfigError("density_table.z_max must be positive");
    }

    unsigned resolved_workers() const
    {
        if (workers > 0) return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }
};

namespace detail {

inline void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) {
            std::string msg = "unknown key '" + it.key() + "' in " + where + "; allowed:";
            for (const char* a : allowed) msg += std::string(" ") + a;
            throw ConfigError(msg);
        }
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T require(const json& j, const char* key, const char* where)
{
    if (!j.contains(key)) throw ConfigError(std::string(where) + " needs '" + key + "'");
    return get_or<T>(j, key, T{});
}

inline DeterministicFunction function_from_json(const json& j, const char* where)
{
    if (j.is_number()) return DeterministicFunction::constant(j.get<double>());
    const auto family = require<std::string>(j, "family", where);
    if (family == "constant") {
        check_keys(j, where, {"family", "value"});
        return DeterministicFunction::constant(require<double>(j, "value", where));
    }
    if (family == "linear") {
        check_keys(j, where, {"family", "intercept", "slope"});
        return DeterministicFunction::linear(require<double>(j, "intercept", where), require<double>(j, "slope", where));
    }
    if (family == "sinusoidal") {
        check_keys(j, where, {"family", "mean", "amplitude", "frequency", "phase"});
        return DeterministicFunction::sinusoidal(require<double>(j, "mean", where), require<double>(j, "amplitude", where),
                                                 require<double>(j, "frequency", where), get_or<double>(j, "phase", 0.0));
    }
    throw ConfigError("unknown function family '" + family + "' in " + where + "; valid choices: constant, linear, sinusoidal");
}

inline json function_to_json(const DeterministicFunction& f)
{
    const auto& p = f.params();
    switch (f.family()) {
    case FunctionFamily::constant: return {{"family", "constant"}, {"value", p[0]}};
    case FunctionFamily::linear: return {{"family", "linear"}, {"intercept", p[0]}, {"slope", p[1]}};
    case FunctionFamily::sinusoidal:
        return {{"family", "sinusoidal"}, {"mean", p[0]}, {"amplitude", p[1]}, {"frequency", p[2]}, {"phase", p[3]}};
    }
    return {};
}

inline JumpSizeDistribution size_from_json(const json& j)
{
    const char* where = "model.jumps.size";
    const auto family = require<std::string>(j, "family", where);
    if (family == "constant") {
        check_keys(j, where, {"family", "value"});
        return {SizeFamily::constant, require<double>(j, "value", where), 0.0};
    }
    if (family == "normal") {
        check_keys(j, where, {"family", "mean", "sd"});
        return {SizeFamily::normal, require<double>(j, "mean", where), require<double>(j, "sd", where)};
    }
    if (family == "uniform") {
        check_keys(j, where, {"family", "lo", "hi"});
        return {SizeFamily::uniform, require<double>(j, "lo", where), require<double>(j, "hi", where)};
    }
    throw ConfigError("unknown jump size family '" + family + "'; valid choices: constant, normal, uniform");
}

inline json size_to_json(const JumpSizeDistribution& s)
{
    switch (s.family) {
    case SizeFamily::constant: return {{"family", "constant"}, {"value", s.a}};
    case SizeFamily::normal: return {{"family", "normal"}, {"mean", s.a}, {"sd", s.b}};
    case SizeFamily::uniform: return {{"family", "uniform"}, {"lo", s.a}, {"hi", s.b}};
    }
    return {};
}

inline JumpSpec jumps_from_json(const json& j)
{
    const char* where = "model.jumps";
    const auto type = get_or<std::string>(j, "type", "none");
    if (type == "none") {
        check_keys(j, where, {"type"});
        return JumpSpec::none();
    }
    if (type == "list") {
        check_keys(j, where, {"type", "events"});
        std::vector<JumpEvent> events;
        for (const auto& e : j.value("events", json::array())) {
            check_keys(e, "model.jumps.events[]", {"time", "size"});
            events.push_back({require<double>(e, "time", "jump event"), require<double>(e, "size", "jump event")});
        }
        return JumpSpec::list(std::move(events));
    }
    if (type == "poisson") {
        check_keys(j, where, {"type", "intensity", "size"});
        if (!j.contains("intensity") || !j.contains("size")) throw ConfigError("poisson jumps need intensity and size");
        return JumpSpec::poisson(function_from_json(j.at("intensity"), "model.jumps.intensity"), size_from_json(j.at("size")));
    }
    throw ConfigError("unknown jump type '" + type + "'; valid choices: none, list, poisson");
}

inline json jumps_to_json(const JumpSpec& s)
{
    switch (s.kind) {
    case JumpKind::none: return {{"type", "none"}};
    case JumpKind::list: {
        json events = json::array();
        for (const auto& e : s.events) events.push_back({{"time", e.time}, {"size", e.size}});
        return {{"type", "list"}, {"events", events}};
    }
    case JumpKind::poisson:
        return {{"type", "poisson"}, {"intensity", function_to_json(s.intensity)}, {"size", size_to_json(s.size)}};
    }
    return {};
}

} // namespace detail

inline SchemeKind parse_scheme(const std::string& name)
{
    if (name == "exact") return SchemeKind::exact;
    if (name == "euler-bridge") return SchemeKind::euler_bridge;
    throw ConfigError("unknown scheme '" + name + "'; valid choices: exact, euler-bridge");
}

/// Missing keys take their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const json& j)
{
    using namespace detail;
    check_keys(j, "config", {"model", "grid", "scheme", "delta", "t", "replications", "limit_draws", "seed", "workers",
                             "tol", "out", "density_table"});
    RunConfig cfg;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, "model", {"drift", "vol", "jumps", "horizon"});
        if (m.contains("drift")) cfg.model.drift = function_from_json(m.at("drift"), "model.drift");
        if (m.contains("vol")) cfg.model.vol = function_from_json(m.at("vol"), "model.vol");
        if (m.contains("jumps")) cfg.model.jumps = jumps_from_json(m.at("jumps"));
        cfg.model.horizon = get_or<double>(m, "horizon", cfg.model.horizon);
    }
    cfg.t = get_or<double>(j, "t", cfg.model.horizon);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"c", "epsilon", "epsilons"});
        cfg.c = get_or<double>(g, "c", cfg.c);
        if (g.contains("epsilon") && g.contains("epsilons")) throw ConfigError("grid: give epsilon or epsilons, not both");
        if (g.contains("epsilon")) cfg.epsilons = {get_or<double>(g, "epsilon", 0.0)};
        if (g.contains("epsilons")) cfg.epsilons = get_or<std::vector<double>>(g, "epsilons", {});
    }
    cfg.scheme = parse_scheme(get_or<std::string>(j, "scheme", "exact"));
    if (j.contains("delta") && !j.at("delta").is_null()) cfg.delta = get_or<double>(j, "delta", 0.0);
    const auto reps = get_or<long long>(j, "replications", static_cast<long long>(cfg.replications));
    if (reps < 0) throw ConfigError("replications must be at least 100");
    cfg.replications = static_cast<std::size_t>(reps);
    const auto draws = get_or<long long>(j, "limit_draws", static_cast<long long>(cfg.limit_draws));
    if (draws < 1) throw ConfigError("limit_draws must be positive");
    cfg.limit_draws = static_cast<std::size_t>(draws);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.workers = get_or<unsigned>(j, "workers", cfg.workers);
    cfg.tol = get_or<double>(j, "tol", cfg.tol);
    cfg.out = get_or<std::string>(j, "out", cfg.out);
    if (j.contains("density_table")) {
        const auto& d = j.at("density_table");
        check_keys(d, "density_table", {"c", "sigma", "y_points", "z_points", "z_max"});
        cfg.density.c = get_or<double>(d, "c", cfg.density.c);
        cfg.density.sigma = get_or<double>(d, "sigma", cfg.density.sigma);
        cfg.density.y_points = get_or<std::size_t>(d, "y_points", cfg.density.y_points);
        cfg.density.z_points = get_or<std::size_t>(d, "z_points", cfg.density.z_points);
        cfg.density.z_max = get_or<double>(d, "z_max", cfg.density.z_max);
    }
    return cfg;
}

inline json config_to_json(const RunConfig& cfg)
{
    using namespace detail;
    json j;
    j["model"] = {{"drift", function_to_json(cfg.model.drift)},
                  {"vol", function_to_json(cfg.model.vol)},
                  {"jumps", jumps_to_json(cfg.model.jumps)},
                  {"horizon", cfg.model.horizon}};
    j["grid"] = {{"c", cfg.c}, {"epsilons", cfg.epsilons}};
    j["scheme"] = to_string(cfg.scheme);
    j["delta"] = cfg.delta ? json(*cfg.delta) : json(nullptr);
    j["t"] = cfg.t;
    j["replications"] = cfg.replications;
    j["limit_draws"] = cfg.limit_draws;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["tol"] = cfg.tol;
    j["out"] = cfg.out;
    j["density_table"] = {{"c", cfg.density.c},
                          {"sigma", cfg.density.sigma},
                          {"y_points", cfg.density.y_points},
                          {"z_points", cfg.density.z_points},
                          {"z_max", cfg.density.z_max}};
    return j;
}

/// The configuration as embedded in outputs: everything that determines the
/// numbers, without the output directory and the worker count.
inline json provenance_json(const RunConfig& cfg)
{
    json j = config_to_json(cfg);
    j.erase("out");
    j.erase("workers");
    return j;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace gridrv
