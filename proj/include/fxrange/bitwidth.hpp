#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fxrange/interval.hpp"
#include "fxrange/oselm.hpp"
#include "fxrange/range_report.hpp"
#include "fxrange/variables.hpp"

namespace fxrange {

/// Sign flag, integer bits and fraction bits of a fixed-point word.
///
/// Signed words span [-2^int_bits, 2^int_bits - 2^-frac_bits], unsigned
/// words [0, 2^int_bits - 2^-frac_bits].
struct FixedPointFormat {
    bool is_signed = false;
    int int_bits = 0;
    int frac_bits = 0;

    int total_bits() const { return int_bits + frac_bits + (is_signed ? 1 : 0); }
    double ulp() const { return std::ldexp(1.0, -frac_bits); }
    double max_value() const { return std::ldexp(1.0, int_bits) - ulp(); }
    double min_value() const { return is_signed ? -std::ldexp(1.0, int_bits) : 0.0; }

    bool covers(const Interval& iv) const { return min_value() <= iv.lo && iv.hi <= max_value(); }

    void validate() const
    {
        if (int_bits < 0 || frac_bits < 0 || total_bits() < 1) {
            throw std::invalid_argument("fixed-point format needs at least one bit and non-negative fields");
        }
    }

    friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

inline std::string to_string(const FixedPointFormat& f)
{
    return std::string(f.is_signed ? "s" : "u") + std::to_string(f.int_bits) + "." + std::to_string(f.frac_bits);
}

using FormatTable = std::map<std::string, FixedPointFormat, std::less<>>;

inline const FixedPointFormat& format_of(const FormatTable& table, std::string_view name)
{
    auto it = table.find(name);
    if (it == table.end()) {
        throw std::invalid_argument("format table has no entry for '" + std::string(name) + "'");
    }
    return it->second;
}

struct IntegerBits {
    int int_bits = 0;
    bool is_signed = false;
    /// Integer field including the sign bit.
    int total() const { return int_bits + (is_signed ? 1 : 0); }
};

/// ceil(log2(max(|lo|, |hi|) + 1)) magnitude bits, plus a sign bit when lo < 0.
inline IntegerBits integer_bits(const Interval& iv)
{
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
        throw std::domain_error("integer_bits needs finite bounds");
    }
    const double need = iv.magnitude() + 1.0;
    // Smallest k with 2^k >= need; avoids trusting log2 at exact powers of two.
    int k = std::max(0, static_cast<int>(std::ceil(std::log2(need))) - 1);
    while (std::ldexp(1.0, k) < need) {
        ++k;
    }
    return {k, iv.lo < 0.0};
}

struct AllocationOptions {
    int frac_bits = 16;
    /// Added to every integer field (the dynamic baseline uses 1).
    int extra_int_bits = 0;
    std::map<std::string, int, std::less<>> frac_overrides;
};

/// Applies integer_bits to every variable's allocation range.
inline FormatTable allocate(const RangeReport& report, const AllocationOptions& opts = {})
{
    if (opts.frac_bits < 0 || opts.extra_int_bits < 0) {
        throw std::invalid_argument("allocate: negative bit counts");
    }
    FormatTable table;
    for (const auto& [name, range] : report.variables()) {
        const IntegerBits ib = integer_bits(range.allocation());
        FixedPointFormat fmt{ib.is_signed, ib.int_bits + opts.extra_int_bits, opts.frac_bits};
        if (auto it = opts.frac_overrides.find(name); it != opts.frac_overrides.end()) {
            fmt.frac_bits = it->second;
        }
        fmt.validate();
        if (!fmt.covers(range.allocation())) {
            throw std::logic_error("allocated format " + to_string(fmt) + " does not cover " + name);
        }
        table.emplace(name, fmt);
    }
    return table;
}

inline FormatTable allocate(const RangeReport& report, int frac_bits)
{
    AllocationOptions opts;
    opts.frac_bits = frac_bits;
    return allocate(report, opts);
}

/// Multiplications in one training step plus one prediction:
/// 4 N^2 + (3m + n + 1) N for hidden size N.
inline std::uint64_t mult_count(std::uint64_t n, std::uint64_t hidden, std::uint64_t m)
{
    return 4 * hidden * hidden + (3 * m + n + 1) * hidden;
}

/// Number of elements stored for a named variable in a model of this size.
inline std::uint64_t element_count(std::string_view name, const oselm::ModelConfig& cfg)
{
    const auto n = static_cast<std::uint64_t>(cfg.n);
    const auto k = static_cast<std::uint64_t>(cfg.hidden);
    const auto m = static_cast<std::uint64_t>(cfg.m);
    const std::map<std::string_view, std::uint64_t> counts = {
        {"x", n},        {"t", m},       {"alpha", n * k}, {"b", k},          {"e", k},
        {"h", k},        {"gamma1", k},  {"gamma2", k},    {"gamma3", k * k}, {"gamma4", 1},
        {"gamma5", 1},   {"gamma6", k * k}, {"P", k * k},  {"gamma7", k},     {"gamma8", m},
        {"gamma9", m},   {"gamma10", k * m}, {"beta", k * m}, {"pred.e", k},  {"pred.h", k},
        {"pred.y", m},
    };
    auto it = counts.find(name);
    if (it == counts.end()) {
        throw std::invalid_argument("no storage shape known for variable '" + std::string(name) + "'");
    }
    return it->second;
}

/// Total storage bits of every array in the table: element count times word width.
inline std::uint64_t storage_cost(const FormatTable& table, const oselm::ModelConfig& cfg)
{
    std::uint64_t bits = 0;
    for (const auto& [name, fmt] : table) {
        bits += element_count(name, cfg) * static_cast<std::uint64_t>(fmt.total_bits());
    }
    return bits;
}

}  // namespace fxrange
