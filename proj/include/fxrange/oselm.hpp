#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fxrange/observed_range.hpp"
#include "fxrange/variables.hpp"

// Double-precision OS-ELM. Serves as the source of the analysis constants
// (P0, beta0), as the dynamic baseline and as the oracle for the update
// identities the static analysis relies on.
namespace fxrange::oselm {

using Eigen::MatrixXd;

struct ModelConfig {
    int n = 0;
    int hidden = 0;
    int m = 0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (n < 1 || hidden < 1 || m < 1) {
            throw std::invalid_argument("model sizes n, hidden and m must be positive");
        }
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Activation { identity, sigmoid };

struct ModelState {
    MatrixXd alpha;  // n x hidden
    MatrixXd bias;   // 1 x hidden
    MatrixXd P;      // hidden x hidden, SPD
    MatrixXd beta;   // hidden x m
    Activation activation = Activation::identity;
};

/// H0^T H0 (or H^T H for a batch solve) is not invertible.
class InitSingular : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All intermediates of one training step, plus the updated P and beta.
struct StepTrace {
    MatrixXd e;
    MatrixXd h;
    std::array<MatrixXd, 10> gamma;  // gamma[0] is gamma(1)
    MatrixXd P;
    MatrixXd beta;

    const MatrixXd& operator[](TrainVar v) const
    {
        switch (v) {
        case TrainVar::e: return e;
        case TrainVar::h: return h;
        case TrainVar::P: return P;
        case TrainVar::beta: return beta;
        case TrainVar::gamma1: return gamma[0];
        case TrainVar::gamma2: return gamma[1];
        case TrainVar::gamma3: return gamma[2];
        case TrainVar::gamma4: return gamma[3];
        case TrainVar::gamma5: return gamma[4];
        case TrainVar::gamma6: return gamma[5];
        case TrainVar::gamma7: return gamma[6];
        case TrainVar::gamma8: return gamma[7];
        case TrainVar::gamma9: return gamma[8];
        case TrainVar::gamma10: return gamma[9];
        }
        throw std::logic_error("unknown training variable");
    }

    double gamma5() const { return gamma[4](0, 0); }
};

struct PredictTrace {
    MatrixXd e;
    MatrixXd h;
    MatrixXd y;
};

/// C = A*B accumulating k = 0..v-1 in order; every accumulator value
/// (including the initial zero) goes to `acc` when given.
inline MatrixXd ordered_product(const MatrixXd& a, const MatrixXd& b, ObservedRange* acc = nullptr)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("ordered_product: inner dimensions differ");
    }
    MatrixXd c(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            if (acc) {
                acc->add(0.0);
            }
            for (Eigen::Index k = 0; k < a.cols(); ++k) {
                sum += a(i, k) * b(k, j);
                if (acc) {
                    acc->add(sum);
                }
            }
            c(i, j) = sum;
        }
    }
    return c;
}

inline MatrixXd activate(MatrixXd z, Activation act)
{
    if (act == Activation::sigmoid) {
        z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }
    return z;
}

/// H = G(X alpha + 1 b).
inline MatrixXd hidden_layer(const MatrixXd& x, const MatrixXd& alpha, const MatrixXd& bias,
                             Activation act = Activation::identity)
{
    MatrixXd z = x * alpha;
    z.rowwise() += bias.row(0);
    return activate(std::move(z), act);
}

inline bool is_positive_definite(const MatrixXd& p)
{
    if (p.rows() != p.cols() || p.rows() == 0) {
        return false;
    }
    Eigen::LLT<MatrixXd> llt(p);
    return llt.info() == Eigen::Success;
}

namespace detail {

// Reciprocal condition below which a Gram matrix is treated as singular.
inline constexpr double kSingularRcond = 1e-14;

inline Eigen::LLT<MatrixXd> gram_factor(const MatrixXd& h)
{
    if (h.rows() < h.cols()) {
        throw InitSingular("fewer samples (" + std::to_string(h.rows()) + ") than hidden nodes (" +
                           std::to_string(h.cols()) + ")");
    }
    MatrixXd gram = h.transpose() * h;
    Eigen::LLT<MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
        throw InitSingular("H^T H is singular or numerically rank deficient");
    }
    return llt;
}

inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

struct InitResult {
    MatrixXd P0;
    MatrixXd beta0;
};

/// P0 = (H0^T H0)^-1, beta0 = P0 H0^T T0.
inline InitResult init(const MatrixXd& h0, const MatrixXd& t0)
{
    if (h0.rows() != t0.rows()) {
        throw std::invalid_argument("init: H0 and T0 row counts differ");
    }
    auto llt = detail::gram_factor(h0);
    const auto k = h0.cols();
    MatrixXd p0 = detail::symmetrized(llt.solve(MatrixXd::Identity(k, k)));
    MatrixXd beta0 = p0 * (h0.transpose() * t0);
    return {std::move(p0), std::move(beta0)};
}

/// Builds the full initial state from raw initial samples.
inline ModelState initial_state(const MatrixXd& alpha, const MatrixXd& bias, const MatrixXd& x0, const MatrixXd& t0,
                                Activation act = Activation::identity)
{
    auto [p0, beta0] = init(hidden_layer(x0, alpha, bias, act), t0);
    return {alpha, bias, std::move(p0), std::move(beta0), act};
}

/// One rank-one update for a single sample (x: 1 x n, t: 1 x m).
///
///   g1 = P h^T, g2 = h P, g3 = g1 g2, g4 = g2 h^T, g5 = g4 + 1,
///   g6 = g3 / g5, P' = P - g6, g7 = P' h^T, g8 = h beta,
///   g9 = t - g8, g10 = g7 g9, beta' = beta + g10
///
/// Accumulator contents of every product are recorded into `ranges` when
/// given; element values are not (see observe()).
inline StepTrace train_step(const ModelState& s, const MatrixXd& x, const MatrixXd& t, TrainRanges* ranges = nullptr)
{
    auto acc = [ranges](TrainVar v) -> ObservedRange* {
        return ranges ? &ranges->accumulator[static_cast<std::size_t>(v)] : nullptr;
    };
    StepTrace tr;
    tr.e = ordered_product(x, s.alpha, acc(TrainVar::e));
    tr.h = activate(tr.e + s.bias, s.activation);
    const MatrixXd ht = tr.h.transpose();
    auto& g = tr.gamma;
    g[0] = ordered_product(s.P, ht, acc(TrainVar::gamma1));
    g[1] = ordered_product(tr.h, s.P, acc(TrainVar::gamma2));
    g[2] = ordered_product(g[0], g[1], acc(TrainVar::gamma3));
    g[3] = ordered_product(g[1], ht, acc(TrainVar::gamma4));
    g[4] = g[3].array() + 1.0;
    g[5] = g[2] / g[4](0, 0);
    tr.P = s.P - g[5];
    g[6] = ordered_product(tr.P, ht, acc(TrainVar::gamma7));
    g[7] = ordered_product(tr.h, s.beta, acc(TrainVar::gamma8));
    g[8] = t - g[7];
    g[9] = ordered_product(g[6], g[8], acc(TrainVar::gamma10));
    tr.beta = s.beta + g[9];
    return tr;
}

inline void advance(ModelState& s, const StepTrace& tr)
{
    s.P = tr.P;
    s.beta = tr.beta;
}

/// Records the element values of every training variable.
inline void observe(const StepTrace& tr, TrainRanges& ranges)
{
    for (std::size_t i = 0; i < kTrainVarCount; ++i) {
        const auto& m = tr[static_cast<TrainVar>(i)];
        auto& r = ranges.value[i];
        for (Eigen::Index k = 0; k < m.size(); ++k) {
            r.add(m.data()[k]);
        }
    }
}

/// y = G(x alpha + b) beta, via e = x alpha, h = e + b.
inline PredictTrace predict_trace(const ModelState& s, const MatrixXd& x, PredRanges* ranges = nullptr)
{
    auto acc = [ranges](PredVar v) -> ObservedRange* {
        return ranges ? &ranges->accumulator[static_cast<std::size_t>(v)] : nullptr;
    };
    PredictTrace tr;
    tr.e = ordered_product(x, s.alpha, acc(PredVar::e));
    tr.h = activate(tr.e + s.bias, s.activation);
    tr.y = ordered_product(tr.h, s.beta, acc(PredVar::y));
    if (ranges) {
        const MatrixXd* parts[] = {&tr.e, &tr.h, &tr.y};
        for (std::size_t i = 0; i < kPredVarCount; ++i) {
            for (Eigen::Index k = 0; k < parts[i]->size(); ++k) {
                ranges->value[i].add(parts[i]->data()[k]);
            }
        }
    }
    return tr;
}

inline MatrixXd predict(const ModelState& s, const MatrixXd& x) { return predict_trace(s, x).y; }

/// Batch ELM solution beta* = (H^T H)^-1 H^T T.
inline MatrixXd batch_elm(const MatrixXd& h, const MatrixXd& t)
{
    if (h.rows() != t.rows()) {
        throw std::invalid_argument("batch_elm: H and T row counts differ");
    }
    auto llt = detail::gram_factor(h);
    return llt.solve(h.transpose() * t);
}

inline MatrixXd batch_elm(const MatrixXd& x, const MatrixXd& t, const MatrixXd& alpha, const MatrixXd& bias,
                          Activation act = Activation::identity)
{
    return batch_elm(hidden_layer(x, alpha, bias, act), t);
}

/// P' computed as (P^-1 + h^T h)^-1 through explicit inverses.
inline MatrixXd sherman_morrison_P(const MatrixXd& p, const MatrixXd& h)
{
    const auto k = p.rows();
    if (p.cols() != k || h.cols() != k || h.rows() != 1) {
        throw std::invalid_argument("sherman_morrison_P: shape mismatch");
    }
    Eigen::LLT<MatrixXd> llt(p);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("P is not positive-definite");
    }
    const MatrixXd identity = MatrixXd::Identity(k, k);
    MatrixXd inv = detail::symmetrized(llt.solve(identity));
    MatrixXd updated = inv + h.transpose() * h;
    Eigen::LLT<MatrixXd> llt2(updated);
    if (llt2.info() != Eigen::Success) {
        throw NotPositiveDefinite("P^-1 + h^T h is not positive-definite");
    }
    return detail::symmetrized(llt2.solve(identity));
}

}  // namespace fxrange::oselm
