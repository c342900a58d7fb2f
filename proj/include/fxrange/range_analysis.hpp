#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fxrange/affine.hpp"
#include "fxrange/affine_matrix.hpp"
#include "fxrange/oselm.hpp"
#include "fxrange/range_report.hpp"
#include "fxrange/variables.hpp"

namespace fxrange {

/// Everything the static analysis needs: input ranges and the concrete
/// constants of one initialization.
struct InputSpec {
    Interval x_interval{0.0, 1.0};
    Interval t_interval{0.0, 1.0};
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd bias;
    Eigen::MatrixXd P0;
    Eigen::MatrixXd beta0;

    static InputSpec from_state(const oselm::ModelState& s, Interval x_iv = {0.0, 1.0}, Interval t_iv = {0.0, 1.0})
    {
        if (s.activation != oselm::Activation::identity) {
            throw std::invalid_argument("affine analysis supports the identity activation only");
        }
        // The state's current P and beta become the analysis constants P0, beta0.
        return {x_iv, t_iv, s.alpha, s.bias, s.P, s.beta};
    }

    Eigen::Index n() const { return alpha.rows(); }
    Eigen::Index hidden() const { return alpha.cols(); }
    Eigen::Index m() const { return beta0.cols(); }

    void validate() const
    {
        const auto k = hidden();
        if (alpha.size() == 0 || bias.rows() != 1 || bias.cols() != k || P0.rows() != k || P0.cols() != k ||
            beta0.rows() != k || beta0.cols() == 0) {
            throw std::invalid_argument("input spec: inconsistent shapes");
        }
        if (!oselm::is_positive_definite(P0)) {
            throw std::invalid_argument("input spec: P0 is not positive-definite");
        }
    }
};


/// Raises the lower bound of the update denominator to 1.
///
/// The true denominator 1 + h P h^T exceeds 1 whenever P is positive-definite,
/// so any lower bound below 1 is pure overestimation. When the floor fires
/// the result is a fresh single-symbol form over [1, sup].
inline AffineForm clamp_gamma5(const AffineForm& g5, AnalysisContext& ctx)
{
    const Interval iv = g5.interval();
    if (iv.hi < 1.0) {
        throw std::logic_error("denominator upper bound " + std::to_string(iv.hi) +
                               " is below 1; the analysis is inconsistent");
    }
    if (iv.lo >= 1.0) {
        return g5;
    }
    return from_interval(1.0, iv.hi, ctx);
}

/// Element-wise interval hull of two matrices, re-expressed with fresh symbols.
inline AffineMatrix beta_union(const AffineMatrix& a, const AffineMatrix& b, AnalysisContext& ctx)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("beta_union: shape mismatch");
    }
    AffineMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.elements()[i] = from_interval(hull(a.elements()[i].interval(), b.elements()[i].interval()), ctx);
    }
    return out;
}

struct TrainingGraphResult {
    RangeReport report;
    std::vector<AffineMatrix> betas;  // beta0 .. betaN
};

namespace detail {

inline VariableRange range_of(const AffineMatrix& m) { return {mat_interval(m), std::nullopt}; }

inline VariableRange range_of(const ProductResult& p, const AnalysisContext& ctx)
{
    VariableRange r{mat_interval(p.value), std::nullopt};
    if (ctx.options().track_partial_sums) {
        r.accumulator = p.trace.interval;
    }
    return r;
}

inline Interval hull_of(const Eigen::MatrixXd& m)
{
    return {m.minCoeff(), m.maxCoeff()};
}

}  // namespace detail

/// Runs the training step in affine arithmetic with x and t spanning their
/// input ranges and alpha, b, P0, beta0 as exact constants.
///
/// With options().unroll_steps == 1 (the default) the first step stands in
/// for every later one. Larger values chain that many steps, each with its
/// own fresh inputs, and report the union over all of them.
inline TrainingGraphResult analyze_training_graph(const InputSpec& spec, AnalysisContext& ctx)
{
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n());
    const auto m = static_cast<std::size_t>(spec.m());
    const int steps = ctx.options().unroll_steps;
    if (steps < 1) {
        throw std::invalid_argument("unroll_steps must be at least 1");
    }

    const AffineMatrix alpha = mat_from_reals(spec.alpha);
    const AffineMatrix bias = mat_from_reals(spec.bias);
    AffineMatrix P = mat_from_reals(spec.P0);
    AffineMatrix beta = mat_from_reals(spec.beta0);
    std::vector<AffineMatrix> betas{beta};

    RangeReport report;
    report.set(name_of(InputVar::x), {spec.x_interval, std::nullopt});
    report.set(name_of(InputVar::t), {spec.t_interval, std::nullopt});
    report.set(name_of(InputVar::alpha), {detail::hull_of(spec.alpha), std::nullopt});
    report.set(name_of(InputVar::b), {detail::hull_of(spec.bias), std::nullopt});
    // The state buffers also hold the initial constants.
    report.set(name_of(TrainVar::P), {detail::hull_of(spec.P0), std::nullopt});
    report.set(name_of(TrainVar::beta), {detail::hull_of(spec.beta0), std::nullopt});

    for (int step = 0; step < steps; ++step) {
        const AffineMatrix x = mat_from_interval(1, n, spec.x_interval, ctx);
        const AffineMatrix t = mat_from_interval(1, m, spec.t_interval, ctx);

        auto e = mat_mul(x, alpha, ctx);
        AffineMatrix h = mat_add(e.value, bias);
        const AffineMatrix ht = transpose(h);
        auto g1 = mat_mul(P, ht, ctx);
        auto g2 = mat_mul(h, P, ctx);
        auto g3 = mat_mul(g1.value, g2.value, ctx);
        auto g4 = mat_mul(g2.value, ht, ctx);
        AffineMatrix g5(1, 1);
        g5(0, 0) = add_constant(g4.value(0, 0), 1.0);
        if (ctx.options().clamp_gamma5) {
            g5(0, 0) = clamp_gamma5(g5(0, 0), ctx);
        }
        // One reciprocal shared by every element, as with a single divider.
        const AffineForm inv_g5 = recip(g5(0, 0), ctx);
        AffineMatrix g6 = mat_scale(g3.value, inv_g5, ctx);
        AffineMatrix P_next = mat_sub(P, g6);
        auto g7 = mat_mul(P_next, ht, ctx);
        auto g8 = mat_mul(h, beta, ctx);
        AffineMatrix g9 = mat_sub(t, g8.value);
        auto g10 = mat_mul(g7.value, g9, ctx);
        AffineMatrix beta_next = mat_add(beta, g10.value);

        report.widen(name_of(TrainVar::e), detail::range_of(e, ctx));
        report.widen(name_of(TrainVar::h), detail::range_of(h));
        report.widen(name_of(TrainVar::gamma1), detail::range_of(g1, ctx));
        report.widen(name_of(TrainVar::gamma2), detail::range_of(g2, ctx));
        report.widen(name_of(TrainVar::gamma3), detail::range_of(g3, ctx));
        report.widen(name_of(TrainVar::gamma4), detail::range_of(g4, ctx));
        report.widen(name_of(TrainVar::gamma5), detail::range_of(g5));
        report.widen(name_of(TrainVar::gamma6), detail::range_of(g6));
        report.widen(name_of(TrainVar::P), detail::range_of(P_next));
        report.widen(name_of(TrainVar::gamma7), detail::range_of(g7, ctx));
        report.widen(name_of(TrainVar::gamma8), detail::range_of(g8, ctx));
        report.widen(name_of(TrainVar::gamma9), detail::range_of(g9));
        report.widen(name_of(TrainVar::gamma10), detail::range_of(g10, ctx));
        report.widen(name_of(TrainVar::beta), detail::range_of(beta_next));

        P = std::move(P_next);
        beta = std::move(beta_next);
        betas.push_back(beta);
    }
    return {std::move(report), std::move(betas)};
}

/// e = x alpha, h = e + b, y = h beta with beta given as a hull.
inline RangeReport analyze_prediction_graph(const InputSpec& spec, const AffineMatrix& beta_hull, AnalysisContext& ctx)
{
    const auto n = static_cast<std::size_t>(spec.n());
    if (beta_hull.rows() != static_cast<std::size_t>(spec.hidden())) {
        throw std::invalid_argument("prediction graph: beta has the wrong number of rows");
    }
    const AffineMatrix alpha = mat_from_reals(spec.alpha);
    const AffineMatrix bias = mat_from_reals(spec.bias);
    const AffineMatrix x = mat_from_interval(1, n, spec.x_interval, ctx);

    auto e = mat_mul(x, alpha, ctx);
    AffineMatrix h = mat_add(e.value, bias);
    auto y = mat_mul(h, beta_hull, ctx);

    RangeReport report;
    report.set(name_of(PredVar::e), detail::range_of(e, ctx));
    report.set(name_of(PredVar::h), detail::range_of(h));
    report.set(name_of(PredVar::y), detail::range_of(y, ctx));
    return report;
}

/// Full static analysis: training graph, beta hull, prediction graph.
inline RangeReport analyze(const InputSpec& spec, const AnalysisOptions& options = {})
{
    AnalysisContext ctx(options);
    auto training = analyze_training_graph(spec, ctx);
    AffineMatrix hull = training.betas.front();
    for (std::size_t i = 1; i < training.betas.size(); ++i) {
        hull = beta_union(hull, training.betas[i], ctx);
    }
    RangeReport report = std::move(training.report);
    const RangeReport prediction = analyze_prediction_graph(spec, hull, ctx);
    for (const auto& [name, r] : prediction.variables()) {
        report.set(name, r);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Per-step observation of interval convergence.

/// Observed min/max of every training variable at every online step.
struct HypothesisTrace {
    // steps[i] holds step i + 1.
    std::vector<std::array<ObservedRange, kTrainVarCount>> steps;
};

/// For each online sample: probe the current state with `probes` random
/// (x, t) pairs drawn uniformly from [0, 1], record the extrema, then advance
/// with the real sample. The same probe batch is reused at every step so that
/// only the state differs between steps.
inline HypothesisTrace run_hypothesis_experiment(const oselm::ModelState& initial, const Eigen::MatrixXd& online_x,
                                                 const Eigen::MatrixXd& online_t, int probes, std::uint64_t seed)
{
    if (probes < 0) {
        throw std::invalid_argument("probe count must be non-negative");
    }
    if (online_x.rows() != online_t.rows()) {
        throw std::invalid_argument("online inputs and targets differ in length");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = initial.alpha.rows();
    const auto m = initial.beta.cols();
    Eigen::MatrixXd px(probes, n);
    Eigen::MatrixXd pt(probes, m);
    for (int p = 0; p < probes; ++p) {
        for (Eigen::Index j = 0; j < n; ++j) {
            px(p, j) = unit(rng);
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            pt(p, j) = unit(rng);
        }
    }

    HypothesisTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(online_x.rows()));
    oselm::ModelState state = initial;
    for (Eigen::Index i = 0; i < online_x.rows(); ++i) {
        TrainRanges ranges;
        for (int p = 0; p < probes; ++p) {
            oselm::observe(oselm::train_step(state, px.row(p), pt.row(p)), ranges);
        }
        trace.steps.push_back(ranges.value);
        oselm::advance(state, oselm::train_step(state, online_x.row(i), online_t.row(i)));
    }
    return trace;
}

struct ContainmentEntry {
    TrainVar variable;
    std::size_t contained = 0;  // steps i >= 2 inside step 1
    std::size_t checked = 0;    // steps i >= 2 with observations
    double fraction() const { return checked == 0 ? 1.0 : static_cast<double>(contained) / static_cast<double>(checked); }
};

/// Fraction of steps i >= 2 whose observed interval lies inside step 1's.
inline std::vector<ContainmentEntry> check_hypothesis(const HypothesisTrace& trace)
{
    std::vector<ContainmentEntry> out;
    for (std::size_t v = 0; v < kTrainVarCount; ++v) {
        ContainmentEntry entry{static_cast<TrainVar>(v)};
        if (!trace.steps.empty()) {
            const auto& first = trace.steps.front()[v];
            for (std::size_t i = 1; i < trace.steps.size(); ++i) {
                const auto& r = trace.steps[i][v];
                if (r.empty()) {
                    continue;
                }
                ++entry.checked;
                if (!first.empty() && first.lo() <= r.lo() && r.hi() <= first.hi()) {
                    ++entry.contained;
                }
            }
        }
        out.push_back(entry);
    }
    return out;
}

/// CSV with columns step,variable,min,max; one row per step and variable.
inline void write_hypothesis_csv(std::ostream& os, const HypothesisTrace& trace)
{
    os << "step,variable,min,max\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        for (std::size_t v = 0; v < kTrainVarCount; ++v) {
            const auto& r = trace.steps[i][v];
            os << (i + 1) << ',' << kTrainVarNames[v] << ',';
            if (r.empty()) {
                os << ",\n";
            } else {
                os << fmt(r.lo()) << ',' << fmt(r.hi()) << '\n';
            }
        }
    }
}

}  // namespace fxrange
