#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fxrange/interval.hpp"
#include "fxrange/observed_range.hpp"
#include "fxrange/variables.hpp"

namespace fxrange {

/// Range of one named datapath variable.
///
/// `value` covers every element; `accumulator`, present for product
/// variables, covers every value the product's running sum can hold.
struct VariableRange {
    Interval value;
    std::optional<Interval> accumulator;

    /// Range the storage format has to hold.
    Interval allocation() const { return accumulator ? hull(value, *accumulator) : value; }

    friend bool operator==(const VariableRange&, const VariableRange&) = default;
};

class RangeReport {
public:
    using Map = std::map<std::string, VariableRange, std::less<>>;

    void set(std::string_view name, VariableRange r) { vars_.insert_or_assign(std::string(name), r); }

    /// Widens an existing entry (or creates it) to include `r`.
    void widen(std::string_view name, const VariableRange& r)
    {
        auto it = vars_.find(name);
        if (it == vars_.end()) {
            set(name, r);
            return;
        }
        auto& cur = it->second;
        cur.value = hull(cur.value, r.value);
        if (r.accumulator) {
            cur.accumulator = cur.accumulator ? hull(*cur.accumulator, *r.accumulator) : *r.accumulator;
        }
    }

    bool contains(std::string_view name) const { return vars_.find(name) != vars_.end(); }

    const VariableRange& at(std::string_view name) const
    {
        auto it = vars_.find(name);
        if (it == vars_.end()) {
            throw std::out_of_range("no variable named '" + std::string(name) + "' in report");
        }
        return it->second;
    }

    const Map& variables() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    bool empty() const { return vars_.empty(); }

    friend bool operator==(const RangeReport&, const RangeReport&) = default;

private:
    Map vars_;
};

/// Copies observed ranges into a report under the canonical names. Variables
/// never observed are skipped.
template <std::size_t N>
void merge_observed(RangeReport& report, const RangeSet<N>& ranges, const std::array<std::string_view, N>& names)
{
    for (std::size_t i = 0; i < N; ++i) {
        auto value = ranges.value[i].interval();
        if (!value) {
            continue;
        }
        report.widen(names[i], {*value, ranges.accumulator[i].interval()});
    }
}

/// Per-variable result of checking that one report's ranges contain another's.
struct CoverageEntry {
    std::string name;
    bool value_covered = false;
    bool accumulator_covered = false;

    bool covered() const { return value_covered && accumulator_covered; }
};

/// Checks outer ⊇ inner for every variable of `inner`. A variable missing
/// from `outer` counts as uncovered.
inline std::vector<CoverageEntry> coverage(const RangeReport& outer, const RangeReport& inner)
{
    std::vector<CoverageEntry> out;
    for (const auto& [name, r] : inner.variables()) {
        CoverageEntry c{name, false, false};
        if (outer.contains(name)) {
            const auto& o = outer.at(name);
            c.value_covered = o.value.contains(r.value);
            c.accumulator_covered = !r.accumulator || o.allocation().contains(*r.accumulator);
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline bool fully_covered(const std::vector<CoverageEntry>& entries)
{
    for (const auto& e : entries) {
        if (!e.value_covered || !e.accumulator_covered) {
            return false;
        }
    }
    return true;
}

}  // namespace fxrange
