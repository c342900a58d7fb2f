#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fxrange {

/// Closed real interval [lo, hi] with finite bounds.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Interval() = default;
    Interval(double lower, double upper) : lo(lower), hi(upper)
    {
        if (!std::isfinite(lower) || !std::isfinite(upper)) {
            throw std::domain_error("interval bounds must be finite");
        }
        if (lower > upper) {
            throw std::domain_error("interval lower bound exceeds upper bound");
        }
    }

    static Interval point(double v) { return {v, v}; }

    double width() const { return hi - lo; }
    double magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval hull(const Interval& a, const Interval& b)
{
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Interval hull(const Interval& a, double v)
{
    return {std::min(a.lo, v), std::max(a.hi, v)};
}

inline std::string to_string(const Interval& iv)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.6g, %.6g]", iv.lo, iv.hi);
    return buf;
}

// Plain interval arithmetic. Only used as a comparison point for the affine
// engine; it ignores correlation between operands.
namespace ia {

inline Interval add(const Interval& x, const Interval& y) { return {x.lo + y.lo, x.hi + y.hi}; }

inline Interval sub(const Interval& x, const Interval& y) { return {x.lo - y.hi, x.hi - y.lo}; }

inline Interval mul(const Interval& x, const Interval& y)
{
    const double p[] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
    return {*std::min_element(std::begin(p), std::end(p)), *std::max_element(std::begin(p), std::end(p))};
}

}  // namespace ia

}  // namespace fxrange
