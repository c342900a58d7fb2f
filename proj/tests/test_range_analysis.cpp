#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "fxrange/dataset.hpp"
#include "fxrange/range_analysis.hpp"

using namespace fxrange;
using Eigen::MatrixXd;

namespace {

InputSpec unit_scalar_spec()
{
    InputSpec s;
    s.alpha = MatrixXd::Ones(1, 1);
    s.bias = MatrixXd::Zero(1, 1);
    s.P0 = MatrixXd::Ones(1, 1);
    s.beta0 = MatrixXd::Zero(1, 1);
    return s;
}

oselm::ModelState seeded_state(std::uint64_t seed, int n, int hidden, int m, int initial)
{
    Dataset d = gen_synthetic(derive_seed(seed, SeedStream::dataset), n, m, {initial, 1, 0});
    auto w = init_weights(derive_seed(seed, SeedStream::weights), n, hidden);
    return oselm::initial_state(w.alpha, w.bias, d.initial.x, d.initial.t);
}

bool inside(const Interval& iv, double v)
{
    const double tol = 1e-12 * (1.0 + iv.magnitude());
    return iv.lo - tol <= v && v <= iv.hi + tol;
}

}  // namespace

TEST_CASE("scalar unit graph matches hand evaluation", "[analysis]")
{
    // Values evaluated by hand with the multiplication, min-max reciprocal
    // and floor rules on x = 0.5 + 0.5e1, P0 = 1, beta0 = 0.
    const RangeReport r = analyze(unit_scalar_spec());
    CHECK(r.at("h").value == Interval(0.0, 1.0));
    CHECK(r.at("gamma1").value == Interval(0.0, 1.0));
    CHECK(r.at("gamma3").value == Interval(-0.5, 1.0));
    CHECK(r.at("gamma4").value == Interval(-0.5, 1.0));
    CHECK(r.at("gamma5").value == Interval(1.0, 2.0));
    CHECK(r.at("gamma6").value == Interval(-0.625, 1.0));
    CHECK(r.at("P").value == Interval(0.0, 1.625));
    CHECK(r.at("gamma7").value == Interval(-0.4375, 1.25));
    CHECK(r.at("gamma8").value == Interval::point(0.0));
    CHECK(r.at("gamma9").value == Interval(0.0, 1.0));
    CHECK(r.size() == report_variable_names().size());
}

TEST_CASE("without the floor the denominator keeps its affine lower bound", "[analysis]")
{
    AnalysisOptions opts;
    opts.clamp_gamma5 = false;
    const RangeReport r = analyze(unit_scalar_spec(), opts);
    CHECK(r.at("gamma5").value == Interval(0.5, 2.0));
    CHECK(r.at("gamma6").value.width() > Interval(-0.625, 1.0).width());
}

TEST_CASE("zero weights propagate zeros", "[analysis]")
{
    const auto st = seeded_state(1, 3, 2, 2, 10);
    InputSpec s = InputSpec::from_state(st);
    s.alpha.setZero();
    s.bias.setZero();
    AnalysisContext ctx;
    const auto tr = analyze_training_graph(s, ctx);
    CHECK(tr.report.at("h").value == Interval::point(0.0));
    CHECK(tr.report.at("gamma6").value == Interval::point(0.0));
    REQUIRE(tr.betas.size() == 2);
    CHECK(mat_interval(mat_sub(tr.betas[1], tr.betas[0])) == Interval::point(0.0));
}

TEST_CASE("denominator floor", "[analysis]")
{
    AnalysisContext ctx;
    const auto low = clamp_gamma5(from_interval(0.5, 3.0, ctx), ctx);
    CHECK(low.interval() == Interval(1.0, 3.0));
    const auto ok = from_interval(1.5, 3.0, ctx);
    CHECK(clamp_gamma5(ok, ctx) == ok);
    CHECK_THROWS_AS(clamp_gamma5(from_interval(0.2, 0.9, ctx), ctx), std::logic_error);
}

TEST_CASE("beta union is the element hull", "[analysis]")
{
    AnalysisContext ctx;
    AffineMatrix a(1, 2);
    AffineMatrix b(1, 2);
    a(0, 0) = from_interval(0.0, 1.0, ctx);
    b(0, 0) = from_interval(-1.0, 0.5, ctx);
    a(0, 1) = from_interval(2.0, 3.0, ctx);
    b(0, 1) = from_interval(2.0, 3.0, ctx);
    const auto u = beta_union(a, b, ctx);
    CHECK(u(0, 0).interval() == Interval(-1.0, 1.0));
    CHECK(u(0, 1).interval() == Interval(2.0, 3.0));
    CHECK_THROWS_AS(beta_union(a, AffineMatrix(2, 1), ctx), std::invalid_argument);
}

TEST_CASE("prediction with a zero beta hull is zero", "[analysis]")
{
    const auto st = seeded_state(2, 4, 5, 3, 30);
    const InputSpec s = InputSpec::from_state(st);
    AnalysisContext ctx;
    const auto r = analyze_prediction_graph(s, mat_from_reals(MatrixXd::Zero(5, 3)), ctx);
    CHECK(r.at("pred.y").value == Interval::point(0.0));
    CHECK(r.at("pred.e").value.width() > 0.0);
}

TEST_CASE("input spec validation", "[analysis]")
{
    const auto st = seeded_state(3, 4, 5, 3, 30);
    InputSpec s = InputSpec::from_state(st);
    s.P0 = -s.P0;
    CHECK_THROWS_AS(analyze(s), std::invalid_argument);
    auto sig = st;
    sig.activation = oselm::Activation::sigmoid;
    CHECK_THROWS_AS(InputSpec::from_state(sig), std::invalid_argument);
}

TEST_CASE("step-one values of concrete runs lie inside the report", "[analysis][property]")
{
    const auto [n, hidden, m] = GENERATE(std::tuple{4, 5, 3}, std::tuple{16, 8, 4});
    const auto st = seeded_state(21, n, hidden, m, 3 * hidden + 10);
    const RangeReport r = analyze(InputSpec::from_state(st));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long violations = 0;
    for (int run = 0; run < 1000; ++run) {
        const MatrixXd x = MatrixXd::NullaryExpr(1, n, [&] { return u(rng); });
        const MatrixXd t = MatrixXd::NullaryExpr(1, m, [&] { return u(rng); });
        TrainRanges acc;
        const auto step = oselm::train_step(st, x, t, &acc);
        for (std::size_t v = 0; v < kTrainVarCount; ++v) {
            const auto& range = r.at(kTrainVarNames[v]);
            const auto& mat = step[static_cast<TrainVar>(v)];
            for (Eigen::Index k = 0; k < mat.size(); ++k) {
                violations += inside(range.value, mat.data()[k]) ? 0 : 1;
            }
            if (!acc.accumulator[v].empty()) {
                violations += inside(range.allocation(), acc.accumulator[v].lo()) ? 0 : 1;
                violations += inside(range.allocation(), acc.accumulator[v].hi()) ? 0 : 1;
            }
        }
        auto next = st;
        oselm::advance(next, step);
        for (const oselm::ModelState* s : {&st, static_cast<const oselm::ModelState*>(&next)}) {
            PredRanges pr;
            (void)oselm::predict_trace(*s, x, &pr);
            for (std::size_t v = 0; v < kPredVarCount; ++v) {
                const auto& range = r.at(kPredVarNames[v]);
                violations += inside(range.value, pr.value[v].lo()) && inside(range.value, pr.value[v].hi()) ? 0 : 1;
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("unrolled analysis is at least as wide as one step", "[analysis]")
{
    const auto st = seeded_state(4, 4, 5, 3, 30);
    const auto spec = InputSpec::from_state(st);
    AnalysisOptions two;
    two.unroll_steps = 2;
    const RangeReport one_step = analyze(spec);
    const RangeReport two_steps = analyze(spec, two);
    for (const auto& [name, range] : one_step.variables()) {
        CHECK(two_steps.at(name).value.contains(range.value));
    }
    AnalysisOptions zero;
    zero.unroll_steps = 0;
    CHECK_THROWS_AS(analyze(spec, zero), std::invalid_argument);
}

TEST_CASE("analysis is deterministic", "[analysis]")
{
    const auto st = seeded_state(9, 4, 5, 3, 30);
    const auto spec = InputSpec::from_state(st);
    CHECK(analyze(spec) == analyze(spec));
}

TEST_CASE("hypothesis trace has one row per step and variable", "[analysis][hypothesis]")
{
    Dataset d = gen_synthetic(derive_seed(3, SeedStream::dataset), 4, 3, {30, 25, 0});
    auto w = init_weights(derive_seed(3, SeedStream::weights), 4, 5);
    const auto st = oselm::initial_state(w.alpha, w.bias, d.initial.x, d.initial.t);
    const auto trace = run_hypothesis_experiment(st, d.online.x, d.online.t, 50, 77);
    REQUIRE(trace.steps.size() == 25);
    std::ostringstream os;
    write_hypothesis_csv(os, trace);
    const std::string csv = os.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 25 * static_cast<long>(kTrainVarCount));
    CHECK(csv.rfind("step,variable,min,max\n", 0) == 0);

    const auto again = run_hypothesis_experiment(st, d.online.x, d.online.t, 50, 77);
    std::ostringstream os2;
    write_hypothesis_csv(os2, again);
    CHECK(os2.str() == csv);

    const auto report = check_hypothesis(trace);
    REQUIRE(report.size() == kTrainVarCount);
    for (const auto& e : report) {
        CHECK(e.checked == 24);
        CHECK(e.contained <= e.checked);
    }
}

TEST_CASE("containment counts steps inside step one", "[analysis][hypothesis]")
{
    HypothesisTrace trace;
    trace.steps.resize(3);
    auto set = [&](std::size_t step, double lo, double hi) {
        trace.steps[step][0].add(lo);
        trace.steps[step][0].add(hi);
    };
    set(0, -1.0, 1.0);
    set(1, -0.5, 0.5);
    set(2, -2.0, 0.0);
    const auto r = check_hypothesis(trace);
    CHECK(r[0].checked == 2);
    CHECK(r[0].contained == 1);
    CHECK(r[0].fraction() == 0.5);
    CHECK(r[1].checked == 0);
    CHECK(r[1].fraction() == 1.0);
}
