#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fxrange/bitwidth.hpp"
#include "fxrange/config.hpp"
#include "fxrange/fixed_point.hpp"
#include "fxrange/range_report.hpp"
#include "fxrange/variables.hpp"

// Report JSON:
//   {"kind": "aa" | "baseline",
//    "config": {...run config...},
//    "extra_int_bits": 0,
//    "variables": {name: {"interval": [lo, hi], "accumulator": [lo, hi],
//                         "signed": bool, "int_bits": k, "frac_bits": f}},
//    "counters": {...}}                       (optional)
// Interval bounds are hex-float strings so a round trip is bit-exact;
// plain JSON numbers are accepted on input.
namespace fxrange {

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReportDocument {
    std::string kind;
    RunConfig config;
    int extra_int_bits = 0;
    RangeReport ranges;
    FormatTable formats;
    std::optional<EventCounters> counters;

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

inline std::string hex_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

namespace detail {

inline double json_to_double(const nlohmann::json& j, const std::string& where)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') {
            throw SchemaError(where + ": '" + s + "' is not a number");
        }
        return v;
    }
    throw SchemaError(where + ": expected a number");
}

inline nlohmann::json interval_json(const Interval& iv) { return {hex_double(iv.lo), hex_double(iv.hi)}; }

inline Interval interval_of(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) {
        throw SchemaError(where + ": expected [lo, hi]");
    }
    try {
        return {json_to_double(j[0], where), json_to_double(j[1], where)};
    } catch (const std::domain_error& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& where)
{
    if (!j.is_object()) {
        throw SchemaError(where + ": expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw SchemaError("unknown field '" + key + "' in " + where);
        }
    }
}

}  // namespace detail

inline nlohmann::json counters_to_json(const EventCounters& c)
{
    return {{"overflows", c.overflows}, {"underflows", c.underflows}, {"ops_add", c.ops_add},
            {"ops_mul", c.ops_mul},     {"ops_div", c.ops_div}};
}

inline EventCounters counters_from_json(const nlohmann::json& j)
{
    detail::reject_unknown_keys(j, {"overflows", "underflows", "ops_add", "ops_mul", "ops_div"}, "counters");
    try {
        return {j.at("overflows").get<std::uint64_t>(), j.at("underflows").get<std::uint64_t>(),
                j.at("ops_add").get<std::uint64_t>(), j.at("ops_mul").get<std::uint64_t>(),
                j.at("ops_div").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("counters: ") + e.what());
    }
}

inline nlohmann::json to_json(const ReportDocument& doc)
{
    nlohmann::json vars = nlohmann::json::object();
    for (const auto& [name, r] : doc.ranges.variables()) {
        const auto& fmt = format_of(doc.formats, name);
        nlohmann::json v = {{"interval", detail::interval_json(r.value)},
                            {"signed", fmt.is_signed},
                            {"int_bits", fmt.int_bits},
                            {"frac_bits", fmt.frac_bits}};
        if (r.accumulator) {
            v["accumulator"] = detail::interval_json(*r.accumulator);
        }
        vars[name] = std::move(v);
    }
    nlohmann::json j = {{"kind", doc.kind},
                        {"config", config_to_json(doc.config)},
                        {"extra_int_bits", doc.extra_int_bits},
                        {"variables", std::move(vars)}};
    if (doc.counters) {
        j["counters"] = counters_to_json(*doc.counters);
    }
    return j;
}

inline ReportDocument from_json(const nlohmann::json& j)
{
    detail::reject_unknown_keys(j, {"kind", "config", "extra_int_bits", "variables", "counters"}, "report");
    ReportDocument doc;
    try {
        doc.kind = j.at("kind").get<std::string>();
        doc.extra_int_bits = j.value("extra_int_bits", 0);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report: ") + e.what());
    }
    if (doc.kind != "aa" && doc.kind != "baseline") {
        throw SchemaError("report kind must be 'aa' or 'baseline', got '" + doc.kind + "'");
    }
    if (!j.contains("config")) {
        throw SchemaError("report: missing 'config'");
    }
    try {
        doc.config = config_from_json(j.at("config"));
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("report config: ") + e.what());
    }
    if (!j.contains("variables")) {
        throw SchemaError("report: missing 'variables'");
    }
    const auto& vars = j.at("variables");
    if (!vars.is_object()) {
        throw SchemaError("report: 'variables' must be an object");
    }
    constexpr auto known = report_variable_names();
    for (const auto& [name, v] : vars.items()) {
        const std::string where = "variable '" + name + "'";
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw SchemaError("unknown " + where);
        }
        detail::reject_unknown_keys(v, {"interval", "accumulator", "signed", "int_bits", "frac_bits"}, where);
        VariableRange r{detail::interval_of(v.at("interval"), where + " interval"), std::nullopt};
        if (v.contains("accumulator")) {
            r.accumulator = detail::interval_of(v.at("accumulator"), where + " accumulator");
        }
        FixedPointFormat fmt;
        try {
            fmt = {v.at("signed").get<bool>(), v.at("int_bits").get<int>(), v.at("frac_bits").get<int>()};
            fmt.validate();
        } catch (const std::exception& e) {
            throw SchemaError(where + ": " + e.what());
        }
        doc.ranges.set(name, r);
        doc.formats.emplace(name, fmt);
    }
    for (auto name : known) {
        if (!doc.ranges.contains(name)) {
            throw SchemaError("report is missing variable '" + std::string(name) + "'");
        }
    }
    if (j.contains("counters")) {
        doc.counters = counters_from_json(j.at("counters"));
    }
    return doc;
}

inline void write_report(const std::string& path, const ReportDocument& doc)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << to_json(doc).dump(2) << '\n';
}

inline ReportDocument read_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open report '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("report '" + path + "' is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

}  // namespace fxrange
