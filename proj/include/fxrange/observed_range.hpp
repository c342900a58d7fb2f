#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>

#include "fxrange/interval.hpp"
#include "fxrange/variables.hpp"

namespace fxrange {

/// Running min/max of the values a variable was seen to take.
class ObservedRange {
public:
    void add(double v)
    {
        lo_ = std::min(lo_, v);
        hi_ = std::max(hi_, v);
    }

    void merge(const ObservedRange& o)
    {
        lo_ = std::min(lo_, o.lo_);
        hi_ = std::max(hi_, o.hi_);
    }

    bool empty() const { return lo_ > hi_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    std::optional<Interval> interval() const
    {
        if (empty()) {
            return std::nullopt;
        }
        return Interval(lo_, hi_);
    }

private:
    double lo_ = std::numeric_limits<double>::infinity();
    double hi_ = -std::numeric_limits<double>::infinity();
};

/// Observed element values and accumulator contents for a set of variables.
template <std::size_t N>
struct RangeSet {
    std::array<ObservedRange, N> value;
    std::array<ObservedRange, N> accumulator;

    void merge(const RangeSet& o)
    {
        for (std::size_t i = 0; i < N; ++i) {
            value[i].merge(o.value[i]);
            accumulator[i].merge(o.accumulator[i]);
        }
    }
};

using TrainRanges = RangeSet<kTrainVarCount>;
using PredRanges = RangeSet<kPredVarCount>;
using InputRanges = RangeSet<kInputVarCount>;

}  // namespace fxrange
