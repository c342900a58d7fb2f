#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fxrange/fxrange.hpp"

namespace fxrange::cli {
namespace {

using nlohmann::json;

/// Input problems map to kUsage, everything else thrown while computing to kFailure.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) {
        throw InputError("cannot write '" + path + "'");
    }
    f << text;
}

struct ConfigArgs {
    std::string path;
    std::optional<std::uint64_t> seed;
    std::optional<int> frac_bits;
    std::optional<int> probes;
};

void add_config_args(CLI::App* sub, ConfigArgs& a, bool required = true)
{
    auto* opt = sub->add_option("-c,--config", a.path, "run config JSON");
    if (required) {
        opt->required();
    }
    sub->add_option("--seed", a.seed, "override the config seed");
    sub->add_option("--frac-bits", a.frac_bits, "override the fraction bits")->check(CLI::Range(0, 64));
    sub->add_option("--probes", a.probes, "override the probe count")->check(CLI::NonNegativeNumber);
}

RunConfig resolve_config(const ConfigArgs& a, bool fx)
{
    RunConfig c;
    try {
        c = load_config(a.path);
    } catch (const ConfigError& e) {
        throw InputError(e.what());
    }
    if (a.seed) {
        c.model.seed = *a.seed;
    }
    if (a.frac_bits) {
        c.frac_bits = *a.frac_bits;
    }
    if (a.probes) {
        (fx ? c.fx_probes : c.probes) = *a.probes;
    }
    return c;
}

PreparedRun prepare_or_input_error(const RunConfig& c)
{
    try {
        return prepare(c);
    } catch (const DataError& e) {
        throw InputError(e.what());
    }
}

ReportDocument read_report_or_input_error(const std::string& path)
{
    try {
        return read_report(path);
    } catch (const SchemaError& e) {
        throw InputError(e.what());
    }
}

void print_ranges(const ReportDocument& doc, std::ostream& err)
{
    err << "variable    value                          accumulator                    format\n";
    for (const auto& [name, r] : doc.ranges.variables()) {
        std::string acc = r.accumulator ? "[" + num(r.accumulator->lo) + ", " + num(r.accumulator->hi) + "]" : "-";
        std::string val = "[" + num(r.value.lo) + ", " + num(r.value.hi) + "]";
        val.resize(std::max<std::size_t>(val.size(), 30), ' ');
        acc.resize(std::max<std::size_t>(acc.size(), 30), ' ');
        std::string n = name;
        n.resize(std::max<std::size_t>(n.size(), 11), ' ');
        err << n << ' ' << val << ' ' << acc << ' ' << to_string(format_of(doc.formats, name)) << '\n';
    }
}

int cmd_gen_data(const ConfigArgs& a, const oselm::ModelConfig& model, const SplitCounts& counts,
                 const std::string& out_path, std::ostream& out)
{
    std::uint64_t seed = 0;
    if (a.seed) {
        seed = *a.seed;
    } else if (auto env = seed_from_env()) {
        seed = *env;
    }
    try {
        model.validate();
        counts.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    const Dataset d = gen_synthetic(derive_seed(seed, SeedStream::dataset), model.n, model.m, counts);
    std::ostringstream os;
    write_csv(os, d);
    emit(out_path, os.str(), out);
    return kOk;
}

int cmd_analyze(const ConfigArgs& a, const AnalysisOptions& opts, const std::string& out_path, std::ostream& out,
                std::ostream& err)
{
    const RunConfig c = resolve_config(a, false);
    const PreparedRun run = prepare_or_input_error(c);
    const ReportDocument doc = run_analysis(c, run, opts);
    print_ranges(doc, err);
    err << "storage: " << storage_cost(doc.formats, c.model) << " bits\n";
    emit(out_path, to_json(doc).dump(2) + "\n", out);
    return kOk;
}

int cmd_baseline(const ConfigArgs& a, const std::string& out_path, std::ostream& out, std::ostream& err)
{
    const RunConfig c = resolve_config(a, false);
    const PreparedRun run = prepare_or_input_error(c);
    const ReportDocument doc = run_baseline(c, run);
    print_ranges(doc, err);
    emit(out_path, to_json(doc).dump(2) + "\n", out);
    return kOk;
}

int cmd_fxsim(const std::string& report_path, const ConfigArgs& a, const std::string& out_path, std::ostream& out,
              std::ostream& err)
{
    ReportDocument doc = read_report_or_input_error(report_path);
    RunConfig c = doc.config;
    if (!a.path.empty()) {
        c = resolve_config(a, true);
        if (!same_experiment(c, doc.config)) {
            throw InputError("config does not match the configuration recorded in the report");
        }
    } else if (a.probes) {
        c.fx_probes = *a.probes;
    }
    const PreparedRun run = prepare_or_input_error(c);
    const EventCounters counters = run_fxsim(c, run, doc.formats);
    const double of_rate = event_rate_percent(counters.overflows, counters);
    const double uf_rate = event_rate_percent(counters.underflows, counters);
    err << "overflow: " << counters.overflows << ", underflow: " << counters.underflows << '\n';
    err << "overflow rate: " << fixed2(of_rate) << "%, underflow rate: " << fixed2(uf_rate) << "%\n";
    json j = {{"report_kind", doc.kind},
              {"config", config_to_json(c)},
              {"counters", counters_to_json(counters)},
              {"overflow_rate_percent", of_rate},
              {"underflow_rate_percent", uf_rate}};
    emit(out_path, j.dump(2) + "\n", out);
    return counters.overflows == 0 ? kOk : kFailure;
}

int cmd_hypothesis(const ConfigArgs& a, const std::string& out_path, std::ostream& out, std::ostream& err)
{
    const RunConfig c = resolve_config(a, false);
    const PreparedRun run = prepare_or_input_error(c);
    const HypothesisTrace trace = run_hypothesis(c, run, c.probes);
    std::ostringstream os;
    write_hypothesis_csv(os, trace);
    emit(out_path, os.str(), out);
    err << "variable    contained/checked  fraction\n";
    for (const auto& e : check_hypothesis(trace)) {
        std::string n(name_of(e.variable));
        n.resize(std::max<std::size_t>(n.size(), 11), ' ');
        err << n << ' ' << e.contained << '/' << e.checked << "  " << fixed2(e.fraction()) << '\n';
    }
    return kOk;
}

int cmd_compare(const std::string& aa_path, const std::string& base_path, const std::string& out_path,
                std::ostream& out, std::ostream& err)
{
    const ReportDocument aa = read_report_or_input_error(aa_path);
    const ReportDocument base = read_report_or_input_error(base_path);
    if (aa.kind != "aa" || base.kind != "baseline") {
        throw InputError("compare expects an 'aa' report and a 'baseline' report");
    }
    if (!same_experiment(aa.config, base.config)) {
        throw InputError("reports come from different configurations");
    }
    const Comparison cmp = compare_reports(aa, base);
    json vars = json::object();
    for (const auto& e : cmp.coverage) {
        vars[e.name] = e.covered();
        if (!e.covered()) {
            err << "not covered: " << e.name << '\n';
        }
    }
    err << "coverage: " << (cmp.covered ? "PASS" : "FAIL") << '\n';
    err << "storage ratio (aa/baseline): " << fixed2(cmp.ratio()) << " (" << cmp.aa_bits << " / "
        << cmp.baseline_bits << " bits)\n";
    json j = {{"covered", cmp.covered},
              {"coverage", vars},
              {"aa_bits", cmp.aa_bits},
              {"baseline_bits", cmp.baseline_bits},
              {"storage_ratio", cmp.ratio()}};
    emit(out_path, j.dump(2) + "\n", out);
    return cmp.covered ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fixed-point range analysis for online sequential ELM training", "fxrange"};
    app.require_subcommand(1);

    ConfigArgs cfg;
    std::string out_path;
    std::function<int()> action;

    oselm::ModelConfig gen_model{4, 1, 3, 0};
    SplitCounts gen_counts{30, 90, 30};
    auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset as CSV");
    gen->add_option("--seed", cfg.seed, "dataset seed");
    gen->add_option("--n", gen_model.n, "number of features")->check(CLI::PositiveNumber);
    gen->add_option("--m", gen_model.m, "number of classes")->check(CLI::PositiveNumber);
    gen->add_option("--initial", gen_counts.initial, "initial-training rows");
    gen->add_option("--online", gen_counts.online, "online-training rows");
    gen->add_option("--test", gen_counts.test, "test rows");
    gen->add_option("-o,--out", out_path, "output CSV (stdout when omitted)");
    gen->callback([&] { action = [&] { return cmd_gen_data(cfg, gen_model, gen_counts, out_path, out); }; });

    AnalysisOptions opts;
    bool no_clamp = false;
    bool no_partial = false;
    auto* ana = app.add_subcommand("analyze", "static affine range analysis");
    add_config_args(ana, cfg);
    ana->add_option("--unroll", opts.unroll_steps, "training steps to unroll")->check(CLI::PositiveNumber);
    ana->add_flag("--no-clamp", no_clamp, "disable the denominator floor");
    ana->add_flag("--no-partial-sums", no_partial, "ignore product accumulator ranges");
    ana->add_option("-o,--out", out_path, "output report JSON (stdout when omitted)");
    ana->callback([&] {
        opts.clamp_gamma5 = !no_clamp;
        opts.track_partial_sums = !no_partial;
        action = [&] { return cmd_analyze(cfg, opts, out_path, out, err); };
    });

    auto* base = app.add_subcommand("baseline", "simulation-based range estimation");
    add_config_args(base, cfg);
    base->add_option("-o,--out", out_path, "output report JSON (stdout when omitted)");
    base->callback([&] { action = [&] { return cmd_baseline(cfg, out_path, out, err); }; });

    std::string report_path;
    auto* fx = app.add_subcommand("fxsim", "fixed-point simulation with a report's formats");
    fx->add_option("-r,--report", report_path, "report JSON")->required();
    add_config_args(fx, cfg, false);
    fx->add_option("-o,--out", out_path, "output result JSON (stdout when omitted)");
    fx->callback([&] { action = [&] { return cmd_fxsim(report_path, cfg, out_path, out, err); }; });

    auto* hyp = app.add_subcommand("hypothesis", "per-step observed ranges of the training variables");
    add_config_args(hyp, cfg);
    hyp->add_option("-o,--out-csv,--out", out_path, "output CSV (stdout when omitted)");
    hyp->callback([&] { action = [&] { return cmd_hypothesis(cfg, out_path, out, err); }; });

    std::string aa_path;
    std::string base_path;
    auto* cmp = app.add_subcommand("compare", "coverage and storage of an aa report against a baseline report");
    cmp->add_option("--aa-report,--aa", aa_path, "aa report JSON")->required();
    cmp->add_option("--baseline-report,--baseline", base_path, "baseline report JSON")->required();
    cmp->add_option("-o,--out", out_path, "output JSON (stdout when omitted)");
    cmp->callback([&] { action = [&] { return cmd_compare(aa_path, base_path, out_path, out, err); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        return action();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace fxrange::cli
