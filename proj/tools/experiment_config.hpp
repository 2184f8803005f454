#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes_ruin/distributions.hpp"
#include "hawkes_ruin/hawkes.hpp"
#include "hawkes_ruin/parallel.hpp"
#include "hawkes_ruin/risk.hpp"

namespace hawkes_ruin::cli {

using nlohmann::json;

struct ModelBlock {
    double a = 0, beta = 0, c = 0, u = 0;
    std::optional<double> lambda0;  ///< defaults to a
    json shock, claim;
};

struct RunBlock {
    std::uint64_t seed = 20240229;
    std::size_t n = 100'000;
    double horizon = 200.0;
    double time_cap = 0.0;  ///< 0 selects the estimator default
    std::vector<double> u_grid{5.0, 10.0, 20.0, 40.0};
    unsigned workers = 1;
};

struct StationaryBlock {
    double burn_in = 200.0;
    double thin = 5.0;
    std::size_t n = 10'000;
};

struct RecurrenceBlock {
    double level = 2.0;
    std::size_t n = 10'000;
};

struct ExperimentConfig {
    ModelBlock model;
    RunBlock run;
    StationaryBlock stationary;
    RecurrenceBlock recurrence;

    RunOptions options() const { return {run.seed, run.workers}; }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::string& where, std::initializer_list<const char*> known) {
    if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known) found = found || key == k;
        if (!found) throw std::invalid_argument("config: unknown key '" + key + "' in '" + where + "'");
    }
}

template <class T>
T required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw std::invalid_argument("config: missing '" + std::string(key) + "' in '" + where + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: '" + std::string(key) + "' in '" + where + "' has the wrong type");
    }
}

template <class T>
void optional_into(const json& j, const char* key, const std::string& where, T& out) {
    if (j.contains(key)) out = required<T>(j, key, where);
}

}  // namespace detail

/// Tagged distribution record, e.g. {"kind": "exponential", "rate": 1}.
inline Distribution parse_distribution(const json& j, const std::string& where) {
    using detail::reject_unknown_keys;
    using detail::required;
    const auto kind = required<std::string>(j, "kind", where);
    if (kind == "exponential") {
        reject_unknown_keys(j, where, {"kind", "rate"});
        return Exponential{required<double>(j, "rate", where)};
    }
    if (kind == "gamma") {
        reject_unknown_keys(j, where, {"kind", "shape", "rate"});
        return Gamma{required<double>(j, "shape", where), required<double>(j, "rate", where)};
    }
    if (kind == "pareto") {
        reject_unknown_keys(j, where, {"kind", "shape", "scale"});
        return Pareto{required<double>(j, "shape", where), required<double>(j, "scale", where)};
    }
    if (kind == "weibull") {
        reject_unknown_keys(j, where, {"kind", "shape", "scale"});
        return Weibull{required<double>(j, "shape", where), required<double>(j, "scale", where)};
    }
    if (kind == "lognormal") {
        reject_unknown_keys(j, where, {"kind", "location", "scale"});
        return LogNormal{required<double>(j, "location", where), required<double>(j, "scale", where)};
    }
    if (kind == "deterministic") {
        reject_unknown_keys(j, where, {"kind", "value"});
        return Deterministic{required<double>(j, "value", where)};
    }
    throw std::invalid_argument("config: unknown distribution kind '" + kind + "' in '" + where + "'");
}

inline json distribution_to_json(const Distribution& d) {
    return std::visit(
        [](const auto& law) -> json {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) return {{"kind", "exponential"}, {"rate", law.rate}};
            else if constexpr (std::is_same_v<T, Gamma>)
                return {{"kind", "gamma"}, {"shape", law.shape}, {"rate", law.rate}};
            else if constexpr (std::is_same_v<T, Pareto>)
                return {{"kind", "pareto"}, {"shape", law.shape}, {"scale", law.scale}};
            else if constexpr (std::is_same_v<T, Weibull>)
                return {{"kind", "weibull"}, {"shape", law.shape}, {"scale", law.scale}};
            else if constexpr (std::is_same_v<T, LogNormal>)
                return {{"kind", "lognormal"}, {"location", law.location}, {"scale", law.scale}};
            else if constexpr (std::is_same_v<T, Deterministic>) return {{"kind", "deterministic"}, {"value", law.value}};
            else return {{"kind", "tilted"}, {"s", law.s}, {"base", distribution_to_json(*law.base)}};
        },
        d.law());
}

inline ExperimentConfig parse_config(const json& j) {
    using detail::optional_into;
    using detail::reject_unknown_keys;
    using detail::required;
    reject_unknown_keys(j, "config", {"model", "run", "stationary", "recurrence"});
    ExperimentConfig cfg;

    if (!j.contains("model")) throw std::invalid_argument("config: missing 'model' block");
    const json& m = j.at("model");
    reject_unknown_keys(m, "model", {"a", "beta", "shock", "claim", "c", "u", "lambda0"});
    cfg.model.a = required<double>(m, "a", "model");
    cfg.model.beta = required<double>(m, "beta", "model");
    cfg.model.c = required<double>(m, "c", "model");
    optional_into(m, "u", "model", cfg.model.u);
    if (m.contains("lambda0")) cfg.model.lambda0 = required<double>(m, "lambda0", "model");
    if (!m.contains("shock")) throw std::invalid_argument("config: missing 'shock' in 'model'");
    if (!m.contains("claim")) throw std::invalid_argument("config: missing 'claim' in 'model'");
    cfg.model.shock = m.at("shock");
    cfg.model.claim = m.at("claim");

    if (j.contains("run")) {
        const json& r = j.at("run");
        reject_unknown_keys(r, "run", {"seed", "n", "horizon", "time_cap", "u_grid", "workers"});
        optional_into(r, "seed", "run", cfg.run.seed);
        optional_into(r, "n", "run", cfg.run.n);
        optional_into(r, "horizon", "run", cfg.run.horizon);
        optional_into(r, "time_cap", "run", cfg.run.time_cap);
        optional_into(r, "u_grid", "run", cfg.run.u_grid);
        optional_into(r, "workers", "run", cfg.run.workers);
    }
    if (j.contains("stationary")) {
        const json& s = j.at("stationary");
        reject_unknown_keys(s, "stationary", {"burn_in", "thin", "n"});
        optional_into(s, "burn_in", "stationary", cfg.stationary.burn_in);
        optional_into(s, "thin", "stationary", cfg.stationary.thin);
        optional_into(s, "n", "stationary", cfg.stationary.n);
    }
    if (j.contains("recurrence")) {
        const json& s = j.at("recurrence");
        reject_unknown_keys(s, "recurrence", {"level", "n"});
        optional_into(s, "level", "recurrence", cfg.recurrence.level);
        optional_into(s, "n", "recurrence", cfg.recurrence.n);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline HawkesParams hawkes_params(const ExperimentConfig& cfg) {
    HawkesParams p{cfg.model.a, cfg.model.beta, parse_distribution(cfg.model.shock, "model.shock")};
    branching_ratio(p);
    return p;
}

/// Builds and validates the risk model (subcriticality, net profit condition).
inline RiskModel risk_model(const ExperimentConfig& cfg) {
    const HawkesParams p = hawkes_params(cfg);
    return {p, cfg.model.c, parse_distribution(cfg.model.claim, "model.claim"), cfg.model.u,
            cfg.model.lambda0.value_or(cfg.model.a)};
}

}  // namespace hawkes_ruin::cli
