#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fxrange/baseline.hpp"
#include "fxrange/bitwidth.hpp"
#include "fxrange/config.hpp"
#include "fxrange/fxsim.hpp"
#include "fxrange/range_analysis.hpp"
#include "fxrange/report_io.hpp"

// End-to-end steps shared by the command-line tool and the acceptance suite.
namespace fxrange {

/// Static analysis of a configured run, allocated with the configured fraction bits.
inline ReportDocument run_analysis(const RunConfig& cfg, const PreparedRun& run, const AnalysisOptions& opts = {})
{
    const auto spec = InputSpec::from_state(run.initial, cfg.x_interval, cfg.t_interval);
    RangeReport ranges = analyze(spec, opts);
    FormatTable formats = allocate(ranges, cfg.frac_bits);
    return {"aa", cfg, 0, std::move(ranges), std::move(formats), std::nullopt};
}

/// Dynamic baseline of a configured run; formats carry the extra integer bit.
inline ReportDocument run_baseline(const RunConfig& cfg, const PreparedRun& run)
{
    RangeReport ranges = run_baseline_method(run.initial, run.data.online.x, run.data.online.t, cfg.probes,
                                             derive_seed(cfg.model.seed, SeedStream::baseline));
    FormatTable formats = allocate(ranges, baseline_allocation(cfg.frac_bits));
    return {"baseline", cfg, kBaselineExtraIntBits, std::move(ranges), std::move(formats), std::nullopt};
}

inline EventCounters run_fxsim(const RunConfig& cfg, const PreparedRun& run, const FormatTable& formats)
{
    return run_fx_training(run.initial, run.data.online.x, run.data.online.t, formats, cfg.fx_probes,
                           derive_seed(cfg.model.seed, SeedStream::fxsim));
}

inline HypothesisTrace run_hypothesis(const RunConfig& cfg, const PreparedRun& run, int probes)
{
    return run_hypothesis_experiment(run.initial, run.data.online.x, run.data.online.t, probes,
                                     derive_seed(cfg.model.seed, SeedStream::hypothesis));
}

/// True when both configs describe the same model, data and seed.
inline bool same_experiment(const RunConfig& a, const RunConfig& b)
{
    return a.model == b.model && a.splits.initial == b.splits.initial && a.splits.online == b.splits.online &&
           a.splits.test == b.splits.test && a.csv_path == b.csv_path && a.x_interval == b.x_interval &&
           a.t_interval == b.t_interval;
}

struct Comparison {
    std::vector<CoverageEntry> coverage;
    bool covered = false;
    std::uint64_t aa_bits = 0;
    std::uint64_t baseline_bits = 0;
    double ratio() const
    {
        return baseline_bits == 0 ? 0.0 : static_cast<double>(aa_bits) / static_cast<double>(baseline_bits);
    }
};

/// Coverage of the dynamic ranges by the static ones, and the storage cost
/// of both allocations. Both sides are allocated from their ranges with the
/// AA report's fraction bits and no extra integer bit, so the ratio compares
/// the ranges alone.
inline Comparison compare_reports(const ReportDocument& aa, const ReportDocument& baseline)
{
    if (!same_experiment(aa.config, baseline.config)) {
        throw std::invalid_argument("reports come from different configurations");
    }
    Comparison c;
    c.coverage = coverage(aa.ranges, baseline.ranges);
    c.covered = fully_covered(c.coverage);
    c.aa_bits = storage_cost(allocate(aa.ranges, aa.config.frac_bits), aa.config.model);
    c.baseline_bits = storage_cost(allocate(baseline.ranges, aa.config.frac_bits), aa.config.model);
    return c;
}

}  // namespace fxrange
