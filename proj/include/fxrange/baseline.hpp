#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "fxrange/bitwidth.hpp"
#include "fxrange/oselm.hpp"
#include "fxrange/range_report.hpp"

namespace fxrange {

/// Integer bits the dynamic method adds on top of its observed ranges.
inline constexpr int kBaselineExtraIntBits = 1;

/// Simulation-based range estimation in double precision.
///
/// Per online sample: advance one training step with the real sample, then
/// feed `probes` random [0, 1] samples through the training and prediction
/// algorithms of the current state, recording every value (and every
/// accumulator value of each product) seen. The real steps, a prediction on
/// each real sample and the initial state are recorded too.
inline RangeReport run_baseline_method(const oselm::ModelState& initial, const Eigen::MatrixXd& online_x,
                                       const Eigen::MatrixXd& online_t, int probes, std::uint64_t seed)
{
    if (probes < 0) {
        throw std::invalid_argument("probe count must be non-negative");
    }
    if (online_x.rows() != online_t.rows()) {
        throw std::invalid_argument("online inputs and targets differ in length");
    }
    InputRanges inputs;
    TrainRanges train;
    PredRanges pred;
    auto record = [](ObservedRange& r, const Eigen::MatrixXd& m) {
        for (Eigen::Index k = 0; k < m.size(); ++k) {
            r.add(m.data()[k]);
        }
    };
    auto& x_range = inputs.value[static_cast<std::size_t>(InputVar::x)];
    auto& t_range = inputs.value[static_cast<std::size_t>(InputVar::t)];
    record(inputs.value[static_cast<std::size_t>(InputVar::alpha)], initial.alpha);
    record(inputs.value[static_cast<std::size_t>(InputVar::b)], initial.bias);
    record(train.value[static_cast<std::size_t>(TrainVar::P)], initial.P);
    record(train.value[static_cast<std::size_t>(TrainVar::beta)], initial.beta);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd px(1, online_x.cols());
    Eigen::MatrixXd pt(1, online_t.cols());
    oselm::ModelState state = initial;
    for (Eigen::Index i = 0; i < online_x.rows(); ++i) {
        const Eigen::MatrixXd x = online_x.row(i);
        const Eigen::MatrixXd t = online_t.row(i);
        record(x_range, x);
        record(t_range, t);
        auto step = oselm::train_step(state, x, t, &train);
        oselm::observe(step, train);
        oselm::advance(state, step);
        (void)oselm::predict_trace(state, x, &pred);
        for (int p = 0; p < probes; ++p) {
            for (Eigen::Index j = 0; j < px.cols(); ++j) {
                px(0, j) = unit(rng);
            }
            for (Eigen::Index j = 0; j < pt.cols(); ++j) {
                pt(0, j) = unit(rng);
            }
            record(x_range, px);
            record(t_range, pt);
            oselm::observe(oselm::train_step(state, px, pt, &train), train);
            (void)oselm::predict_trace(state, px, &pred);
        }
    }

    RangeReport report;
    merge_observed(report, inputs, kInputVarNames);
    merge_observed(report, train, kTrainVarNames);
    merge_observed(report, pred, kPredVarNames);
    return report;
}

/// Allocation used when the dynamic method's report drives a datapath.
inline AllocationOptions baseline_allocation(int frac_bits)
{
    AllocationOptions opts;
    opts.frac_bits = frac_bits;
    opts.extra_int_bits = kBaselineExtraIntBits;
    return opts;
}

}  // namespace fxrange
