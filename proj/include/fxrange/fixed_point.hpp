#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fxrange/bitwidth.hpp"

// Bit-exact fixed-point arithmetic with saturation and event counting.
//
// Every result is rounded to the nearest multiple of 2^-frac_bits (ties away
// from zero). A result outside the format's range saturates and counts as an
// overflow; a non-zero result that rounds to zero counts as an underflow.
namespace fxrange {

/// Widest word the simulator accepts; keeps every intermediate within 128 bits.
inline constexpr int kMaxSimTotalBits = 62;
inline constexpr int kMaxSimFracBits = 32;

struct EventCounters {
    std::uint64_t overflows = 0;
    std::uint64_t underflows = 0;
    std::uint64_t ops_add = 0;
    std::uint64_t ops_mul = 0;
    std::uint64_t ops_div = 0;

    std::uint64_t total_ops() const { return ops_add + ops_mul + ops_div; }
    std::uint64_t events() const { return overflows + underflows; }

    EventCounters& operator+=(const EventCounters& o)
    {
        overflows += o.overflows;
        underflows += o.underflows;
        ops_add += o.ops_add;
        ops_mul += o.ops_mul;
        ops_div += o.ops_div;
        return *this;
    }

    friend bool operator==(const EventCounters&, const EventCounters&) = default;
};

inline void require_simulable(const FixedPointFormat& f)
{
    f.validate();
    if (f.total_bits() > kMaxSimTotalBits || f.frac_bits > kMaxSimFracBits) {
        throw std::invalid_argument("format " + to_string(f) + " is wider than the simulator supports");
    }
}

struct FxNum {
    std::int64_t raw = 0;
    FixedPointFormat fmt;

    double value() const { return std::ldexp(static_cast<double>(raw), -fmt.frac_bits); }
};

namespace detail {

using wide = __int128;
using uwide = unsigned __int128;

// Intermediates are kept below this many magnitude bits so that doubling
// (for rounding) never overflows.
inline constexpr int kWideBudget = 125;

inline int bit_width(uwide v)
{
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return hi ? 64 + std::bit_width(hi) : std::bit_width(static_cast<std::uint64_t>(v));
}

inline uwide magnitude(wide v) { return v < 0 ? static_cast<uwide>(-(v + 1)) + 1 : static_cast<uwide>(v); }

inline wide shl(wide v, int s)
{
    if (v == 0 || s == 0) {
        return v;
    }
    if (bit_width(magnitude(v)) + s > kWideBudget) {
        throw std::overflow_error("fixed-point intermediate exceeds 125 bits");
    }
    return v * (static_cast<wide>(1) << s);
}

inline wide raw_max(const FixedPointFormat& f) { return (static_cast<wide>(1) << (f.int_bits + f.frac_bits)) - 1; }

inline wide raw_min(const FixedPointFormat& f)
{
    return f.is_signed ? -(static_cast<wide>(1) << (f.int_bits + f.frac_bits)) : 0;
}

// Applies the underflow and saturation rules to an already rounded raw value.
inline FxNum finish(wide q, bool exact_nonzero, const FixedPointFormat& f, EventCounters& c)
{
    if (exact_nonzero && q == 0) {
        ++c.underflows;
    }
    if (q > raw_max(f)) {
        ++c.overflows;
        q = raw_max(f);
    } else if (q < raw_min(f)) {
        ++c.overflows;
        q = raw_min(f);
    }
    return {static_cast<std::int64_t>(q), f};
}

// round(num / den) with ties away from zero; den != 0.
inline wide round_div(wide num, wide den)
{
    const uwide n = magnitude(num);
    const uwide d = magnitude(den);
    const uwide q = (2 * n + d) / (2 * d);
    const bool negative = (num < 0) != (den < 0);
    return negative ? -static_cast<wide>(q) : static_cast<wide>(q);
}

/// Rescales an exact value raw * 2^-src_frac into `f`.
inline FxNum rescale(wide value, int src_frac, const FixedPointFormat& f, EventCounters& c)
{
    wide q;
    if (src_frac > f.frac_bits) {
        const int shift = src_frac - f.frac_bits;
        if (shift >= kWideBudget) {
            q = 0;
        } else {
            q = round_div(value, static_cast<wide>(1) << shift);
        }
    } else {
        const int shift = f.frac_bits - src_frac;
        const uwide mag = magnitude(value);
        if (value != 0 && bit_width(mag) + shift > kWideBudget) {
            // Far outside any simulable range: saturate directly.
            q = value < 0 ? raw_min(f) - 1 : raw_max(f) + 1;
        } else {
            q = shl(value, shift);
        }
    }
    return finish(q, value != 0, f, c);
}

}  // namespace detail

/// Rounds a real into `f`.
inline FxNum fx_quantize(double v, const FixedPointFormat& f, EventCounters& c)
{
    if (!std::isfinite(v)) {
        throw std::domain_error("cannot quantize a non-finite value");
    }
    require_simulable(f);
    const double scaled = std::round(std::ldexp(v, f.frac_bits));
    detail::wide q;
    if (std::abs(scaled) >= std::ldexp(1.0, 100)) {
        q = scaled < 0 ? detail::raw_min(f) - 1 : detail::raw_max(f) + 1;
    } else {
        q = static_cast<detail::wide>(scaled);
    }
    return detail::finish(q, v != 0.0, f, c);
}

/// Wraps an exact integer constant without rounding or range checks.
inline FxNum fx_constant(std::int64_t integer)
{
    const int bits = std::bit_width(static_cast<std::uint64_t>(integer < 0 ? -integer : integer));
    return {integer, FixedPointFormat{integer < 0, std::max(bits, 1), 0}};
}

inline FxNum fx_add(const FxNum& a, const FxNum& b, const FixedPointFormat& out, EventCounters& c)
{
    ++c.ops_add;
    const int f = std::max(a.fmt.frac_bits, b.fmt.frac_bits);
    const auto sum = detail::shl(a.raw, f - a.fmt.frac_bits) + detail::shl(b.raw, f - b.fmt.frac_bits);
    return detail::rescale(sum, f, out, c);
}

inline FxNum fx_sub(const FxNum& a, const FxNum& b, const FixedPointFormat& out, EventCounters& c)
{
    ++c.ops_add;
    const int f = std::max(a.fmt.frac_bits, b.fmt.frac_bits);
    const auto diff = detail::shl(a.raw, f - a.fmt.frac_bits) - detail::shl(b.raw, f - b.fmt.frac_bits);
    return detail::rescale(diff, f, out, c);
}

inline FxNum fx_mul(const FxNum& a, const FxNum& b, const FixedPointFormat& out, EventCounters& c)
{
    ++c.ops_mul;
    const detail::wide prod = static_cast<detail::wide>(a.raw) * static_cast<detail::wide>(b.raw);
    return detail::rescale(prod, a.fmt.frac_bits + b.fmt.frac_bits, out, c);
}

/// a / b. A zero divisor counts as an overflow and saturates toward the
/// sign of the dividend (a zero dividend gives zero).
inline FxNum fx_div(const FxNum& a, const FxNum& b, const FixedPointFormat& out, EventCounters& c)
{
    ++c.ops_div;
    if (b.raw == 0) {
        if (a.raw == 0) {
            ++c.overflows;
            return {0, out};
        }
        return detail::finish(a.raw < 0 ? detail::raw_min(out) - 1 : detail::raw_max(out) + 1, true, out, c);
    }
    // raw_out = a.raw * 2^(out.frac + b.frac - a.frac) / b.raw
    const int s = out.frac_bits + b.fmt.frac_bits - a.fmt.frac_bits;
    detail::wide num = a.raw;
    detail::wide den = b.raw;
    if (s >= 0) {
        num = detail::shl(num, s);
    } else {
        den = detail::shl(den, -s);
    }
    return detail::finish(detail::round_div(num, den), a.raw != 0, out, c);
}

/// acc + a*b with the sum rounded once into acc's format: one multiply and
/// one add on a shared accumulator.
inline FxNum fx_mac(const FxNum& acc, const FxNum& a, const FxNum& b, EventCounters& c)
{
    ++c.ops_mul;
    ++c.ops_add;
    const int pf = a.fmt.frac_bits + b.fmt.frac_bits;
    const int f = std::max(acc.fmt.frac_bits, pf);
    const detail::wide prod = static_cast<detail::wide>(a.raw) * static_cast<detail::wide>(b.raw);
    const auto sum = detail::shl(acc.raw, f - acc.fmt.frac_bits) + detail::shl(prod, f - pf);
    return detail::rescale(sum, f, acc.fmt, c);
}

}  // namespace fxrange
