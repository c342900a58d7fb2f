#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fxrange/dataset.hpp"
#include "fxrange/interval.hpp"
#include "fxrange/oselm.hpp"

namespace fxrange {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One pipeline run: model size, data source, seeds and simulation knobs.
///
/// JSON form:
///   {"model": {"n": 4, "hidden": 5, "m": 3}, "seed": 7, "frac_bits": 16,
///    "probes": 1000, "fx_probes": 250,
///    "dataset": {"synthetic": {"initial": 30, "online": 90, "test": 30}}
///            or {"csv": {"path": "iris.csv", "initial": 30, ...}},
///    "x_interval": [0, 1], "t_interval": [0, 1]}
struct RunConfig {
    oselm::ModelConfig model;
    int frac_bits = 16;
    int probes = 1000;
    int fx_probes = 250;
    SplitCounts splits;
    std::optional<std::string> csv_path;  // synthetic data when empty
    Interval x_interval{0.0, 1.0};
    Interval t_interval{0.0, 1.0};

    void validate() const
    {
        model.validate();
        splits.validate();
        if (frac_bits < 0 || probes < 0 || fx_probes < 0) {
            throw ConfigError("frac_bits and probe counts must be non-negative");
        }
        if (splits.initial < model.hidden) {
            throw ConfigError("initial split (" + std::to_string(splits.initial) +
                              ") must hold at least as many samples as hidden nodes (" +
                              std::to_string(model.hidden) + ")");
        }
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where)
{
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError(std::string("unknown field '") + key + "' in " + where);
        }
    }
}

inline Interval interval_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError("an interval must be a two-element array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Seed from the environment variable FXRANGE_SEED, if set and numeric.
inline std::optional<std::uint64_t> seed_from_env()
{
    const char* s = std::getenv("FXRANGE_SEED");
    if (!s || !*s) {
        return std::nullopt;
    }
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') {
        throw ConfigError("FXRANGE_SEED is not a non-negative integer");
    }
    return v;
}

inline RunConfig config_from_json(const nlohmann::json& j)
{
    try {
        detail::reject_unknown(j, {"model", "seed", "frac_bits", "probes", "fx_probes", "dataset", "x_interval",
                                   "t_interval"},
                               "config");
        RunConfig c;
        const auto& model = j.at("model");
        detail::reject_unknown(model, {"n", "hidden", "m"}, "model");
        c.model.n = model.at("n").get<int>();
        c.model.hidden = model.at("hidden").get<int>();
        c.model.m = model.at("m").get<int>();
        if (j.contains("seed")) {
            c.model.seed = j.at("seed").get<std::uint64_t>();
        } else if (auto env = seed_from_env()) {
            c.model.seed = *env;
        }
        c.frac_bits = detail::get_or(j, "frac_bits", c.frac_bits);
        c.probes = detail::get_or(j, "probes", c.probes);
        c.fx_probes = detail::get_or(j, "fx_probes", c.fx_probes);
        const auto& ds = j.at("dataset");
        const nlohmann::json* body = nullptr;
        if (ds.contains("synthetic") && !ds.contains("csv")) {
            body = &ds.at("synthetic");
            detail::reject_unknown(*body, {"initial", "online", "test"}, "synthetic dataset");
        } else if (ds.contains("csv") && !ds.contains("synthetic")) {
            body = &ds.at("csv");
            detail::reject_unknown(*body, {"path", "initial", "online", "test"}, "csv dataset");
            c.csv_path = body->at("path").get<std::string>();
        } else {
            throw ConfigError("dataset must have exactly one of 'synthetic' or 'csv'");
        }
        c.splits.initial = body->at("initial").get<int>();
        c.splits.online = body->at("online").get<int>();
        c.splits.test = detail::get_or(*body, "test", 0);
        if (j.contains("x_interval")) {
            c.x_interval = detail::interval_from_json(j.at("x_interval"));
        }
        if (j.contains("t_interval")) {
            c.t_interval = detail::interval_from_json(j.at("t_interval"));
        }
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

inline nlohmann::json config_to_json(const RunConfig& c)
{
    nlohmann::json splits = {{"initial", c.splits.initial}, {"online", c.splits.online}, {"test", c.splits.test}};
    nlohmann::json ds;
    if (c.csv_path) {
        splits["path"] = *c.csv_path;
        ds["csv"] = splits;
    } else {
        ds["synthetic"] = splits;
    }
    return {
        {"model", {{"n", c.model.n}, {"hidden", c.model.hidden}, {"m", c.model.m}}},
        {"seed", c.model.seed},
        {"frac_bits", c.frac_bits},
        {"probes", c.probes},
        {"fx_probes", c.fx_probes},
        {"dataset", ds},
        {"x_interval", {c.x_interval.lo, c.x_interval.hi}},
        {"t_interval", {c.t_interval.lo, c.t_interval.hi}},
    };
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

/// Data and initial model materialized from a config.
struct PreparedRun {
    Dataset data;
    oselm::ModelState initial;
};

/// Loads or generates the data, draws alpha and b, and runs the initialization.
inline PreparedRun prepare(const RunConfig& c)
{
    c.validate();
    Dataset data = c.csv_path ? load_csv(*c.csv_path, c.model.n, c.model.m, c.splits)
                              : gen_synthetic(derive_seed(c.model.seed, SeedStream::dataset), c.model.n, c.model.m,
                                              c.splits);
    auto w = init_weights(derive_seed(c.model.seed, SeedStream::weights), c.model.n, c.model.hidden);
    auto state = oselm::initial_state(w.alpha, w.bias, data.initial.x, data.initial.t);
    return {std::move(data), std::move(state)};
}

}  // namespace fxrange
