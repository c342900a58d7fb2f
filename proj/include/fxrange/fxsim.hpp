#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fxrange/bitwidth.hpp"
#include "fxrange/fixed_point.hpp"
#include "fxrange/oselm.hpp"
#include "fxrange/variables.hpp"

// Software twin of a fixed-point OS-ELM datapath. Each named variable lives
// in its own format from a FormatTable; products run on one accumulator held
// in the destination format.
namespace fxrange {

/// Matrix whose elements share one fixed-point format.
class FxMatrix {
public:
    FxMatrix() = default;
    FxMatrix(Eigen::Index rows, Eigen::Index cols, const FixedPointFormat& fmt)
        : rows_(rows), cols_(cols), fmt_(fmt), raw_(static_cast<std::size_t>(rows * cols), 0)
    {
        require_simulable(fmt);
    }

    static FxMatrix quantize(const Eigen::MatrixXd& m, const FixedPointFormat& fmt, EventCounters& c)
    {
        FxMatrix out(m.rows(), m.cols(), fmt);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                out.set(i, j, fx_quantize(m(i, j), fmt, c));
            }
        }
        return out;
    }

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    const FixedPointFormat& format() const { return fmt_; }

    FxNum operator()(Eigen::Index i, Eigen::Index j) const { return {raw_[index(i, j)], fmt_}; }

    void set(Eigen::Index i, Eigen::Index j, const FxNum& v)
    {
        if (v.fmt != fmt_) {
            throw std::logic_error("FxMatrix::set: format mismatch");
        }
        raw_[index(i, j)] = v.raw;
    }

    Eigen::MatrixXd to_real() const
    {
        Eigen::MatrixXd out(rows_, cols_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            for (Eigen::Index j = 0; j < cols_; ++j) {
                out(i, j) = (*this)(i, j).value();
            }
        }
        return out;
    }

private:
    std::size_t index(Eigen::Index i, Eigen::Index j) const { return static_cast<std::size_t>(i * cols_ + j); }

    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    FixedPointFormat fmt_;
    std::vector<std::int64_t> raw_;
};

inline FxMatrix fx_matmul(const FxMatrix& a, const FxMatrix& b, const FixedPointFormat& out_fmt, EventCounters& c)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("fx_matmul: inner dimensions differ");
    }
    FxMatrix out(a.rows(), b.cols(), out_fmt);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            FxNum acc{0, out_fmt};
            for (Eigen::Index k = 0; k < a.cols(); ++k) {
                acc = fx_mac(acc, a(i, k), b(k, j), c);
            }
            out.set(i, j, acc);
        }
    }
    return out;
}

template <class Op>
FxMatrix fx_elementwise(const FxMatrix& a, const FxMatrix& b, const FixedPointFormat& out_fmt, EventCounters& c, Op op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("fx_elementwise: shape mismatch");
    }
    FxMatrix out(a.rows(), a.cols(), out_fmt);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.set(i, j, op(a(i, j), b(i, j), out_fmt, c));
        }
    }
    return out;
}

inline FxMatrix fx_transpose(const FxMatrix& a)
{
    FxMatrix out(a.cols(), a.rows(), a.format());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.set(j, i, a(i, j));
        }
    }
    return out;
}

struct FxState {
    FxMatrix alpha;
    FxMatrix bias;
    FxMatrix P;
    FxMatrix beta;

    static FxState quantize(const oselm::ModelState& s, const FormatTable& table, EventCounters& c)
    {
        if (s.activation != oselm::Activation::identity) {
            throw std::invalid_argument("fixed-point twin supports the identity activation only");
        }
        return {FxMatrix::quantize(s.alpha, format_of(table, name_of(InputVar::alpha)), c),
                FxMatrix::quantize(s.bias, format_of(table, name_of(InputVar::b)), c),
                FxMatrix::quantize(s.P, format_of(table, name_of(TrainVar::P)), c),
                FxMatrix::quantize(s.beta, format_of(table, name_of(TrainVar::beta)), c)};
    }
};

struct FxStepOutput {
    FxMatrix h;
    FxMatrix P;
    FxMatrix beta;
};

/// One fixed-point training step mirroring oselm::train_step.
inline FxStepOutput fx_train_step(const FxState& s, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                                  const FormatTable& table, EventCounters& c)
{
    auto fmt = [&table](TrainVar v) -> const FixedPointFormat& { return format_of(table, name_of(v)); };
    const FxMatrix xq = FxMatrix::quantize(x, format_of(table, name_of(InputVar::x)), c);
    const FxMatrix tq = FxMatrix::quantize(t, format_of(table, name_of(InputVar::t)), c);

    const FxMatrix e = fx_matmul(xq, s.alpha, fmt(TrainVar::e), c);
    FxMatrix h = fx_elementwise(e, s.bias, fmt(TrainVar::h), c, fx_add);
    const FxMatrix ht = fx_transpose(h);
    const FxMatrix g1 = fx_matmul(s.P, ht, fmt(TrainVar::gamma1), c);
    const FxMatrix g2 = fx_matmul(h, s.P, fmt(TrainVar::gamma2), c);
    const FxMatrix g3 = fx_matmul(g1, g2, fmt(TrainVar::gamma3), c);
    const FxMatrix g4 = fx_matmul(g2, ht, fmt(TrainVar::gamma4), c);
    const FxNum g5 = fx_add(g4(0, 0), fx_constant(1), fmt(TrainVar::gamma5), c);
    FxMatrix g6(g3.rows(), g3.cols(), fmt(TrainVar::gamma6));
    for (Eigen::Index i = 0; i < g3.rows(); ++i) {
        for (Eigen::Index j = 0; j < g3.cols(); ++j) {
            g6.set(i, j, fx_div(g3(i, j), g5, g6.format(), c));
        }
    }
    FxMatrix P = fx_elementwise(s.P, g6, fmt(TrainVar::P), c, fx_sub);
    const FxMatrix g7 = fx_matmul(P, ht, fmt(TrainVar::gamma7), c);
    const FxMatrix g8 = fx_matmul(h, s.beta, fmt(TrainVar::gamma8), c);
    const FxMatrix g9 = fx_elementwise(tq, g8, fmt(TrainVar::gamma9), c, fx_sub);
    const FxMatrix g10 = fx_matmul(g7, g9, fmt(TrainVar::gamma10), c);
    FxMatrix beta = fx_elementwise(s.beta, g10, fmt(TrainVar::beta), c, fx_add);
    return {std::move(h), std::move(P), std::move(beta)};
}

/// Prediction from an already computed hidden layer: y = h beta.
inline FxMatrix fx_predict_from_hidden(const FxState& s, const FxMatrix& h, const FormatTable& table, EventCounters& c)
{
    return fx_matmul(h, s.beta, format_of(table, name_of(PredVar::y)), c);
}

/// Full prediction: e = x alpha, h = e + b, y = h beta.
inline FxMatrix fx_predict(const FxState& s, const Eigen::MatrixXd& x, const FormatTable& table, EventCounters& c)
{
    const FxMatrix xq = FxMatrix::quantize(x, format_of(table, name_of(InputVar::x)), c);
    const FxMatrix e = fx_matmul(xq, s.alpha, format_of(table, name_of(PredVar::e)), c);
    const FxMatrix h = fx_elementwise(e, s.bias, format_of(table, name_of(PredVar::h)), c, fx_add);
    return fx_predict_from_hidden(s, h, table, c);
}

/// Trains sequentially over every row of (x, t) and returns the final state.
inline FxState fx_train(const oselm::ModelState& initial, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                        const FormatTable& table, EventCounters& c)
{
    FxState s = FxState::quantize(initial, table, c);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        auto out = fx_train_step(s, x.row(i), t.row(i), table, c);
        s.P = std::move(out.P);
        s.beta = std::move(out.beta);
    }
    return s;
}

/// Verification protocol: per online sample, advance one fixed-point step,
/// then drive `probes` random [0, 1] samples through the training and
/// prediction paths of the current state. Probe steps never change the state.
inline EventCounters run_fx_training(const oselm::ModelState& initial, const Eigen::MatrixXd& online_x,
                                     const Eigen::MatrixXd& online_t, const FormatTable& table, int probes,
                                     std::uint64_t seed)
{
    if (probes < 0) {
        throw std::invalid_argument("probe count must be non-negative");
    }
    if (online_x.rows() != online_t.rows()) {
        throw std::invalid_argument("online inputs and targets differ in length");
    }
    EventCounters c;
    FxState s = FxState::quantize(initial, table, c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd px(1, online_x.cols());
    Eigen::MatrixXd pt(1, online_t.cols());
    for (Eigen::Index i = 0; i < online_x.rows(); ++i) {
        auto out = fx_train_step(s, online_x.row(i), online_t.row(i), table, c);
        s.P = std::move(out.P);
        s.beta = std::move(out.beta);
        for (int p = 0; p < probes; ++p) {
            for (Eigen::Index j = 0; j < px.cols(); ++j) {
                px(0, j) = unit(rng);
            }
            for (Eigen::Index j = 0; j < pt.cols(); ++j) {
                pt(0, j) = unit(rng);
            }
            (void)fx_train_step(s, px, pt, table, c);
            (void)fx_predict(s, px, table, c);
        }
    }
    return c;
}

/// Multiplier invocations for one training step followed by one prediction
/// on the same input. The prediction reuses the step's hidden layer, so
/// x alpha is multiplied once; divisions are counted separately.
inline std::uint64_t instrumented_mult_count(const oselm::ModelState& state, const FormatTable& table,
                                             std::uint64_t seed = 0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(1, state.alpha.rows(), [&] { return unit(rng); });
    Eigen::MatrixXd t = Eigen::MatrixXd::NullaryExpr(1, state.beta.cols(), [&] { return unit(rng); });
    EventCounters setup;
    const FxState s = FxState::quantize(state, table, setup);
    EventCounters c;
    auto out = fx_train_step(s, x, t, table, c);
    (void)fx_predict_from_hidden(s, out.h, table, c);
    return c.ops_mul;
}

/// Overflow/underflow rate in percent of all counted operations.
inline double event_rate_percent(std::uint64_t events, const EventCounters& c)
{
    return c.total_ops() == 0 ? 0.0 : 100.0 * static_cast<double>(events) / static_cast<double>(c.total_ops());
}

}  // namespace fxrange
