#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fxrange/affine.hpp"

// Random expression DAGs evaluated twice: once in affine arithmetic, once on
// concrete inputs drawn from the input intervals.
namespace fxrange::testing {

enum class Op { add, sub, mul, scale, add_const, div };

struct Node {
    Op op;
    int a = 0;
    int b = 0;
    double k = 0.0;
};

struct Dag {
    std::vector<Interval> inputs;
    std::vector<Node> nodes;  // node i reads values with index < inputs.size() + i
};

inline Dag random_dag(std::mt19937_64& rng, int n_inputs, int n_nodes)
{
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> w(0.0, 3.0);
    Dag d;
    for (int i = 0; i < n_inputs; ++i) {
        const double lo = u(rng);
        d.inputs.emplace_back(lo, lo + w(rng));
    }
    std::uniform_int_distribution<int> op(0, 5);
    for (int i = 0; i < n_nodes; ++i) {
        std::uniform_int_distribution<int> pick(0, n_inputs + i - 1);
        d.nodes.push_back({static_cast<Op>(op(rng)), pick(rng), pick(rng), u(rng)});
    }
    return d;
}

/// Like random_dag, but operands are drawn only from values whose depth is
/// below `max_depth`, so no node sits deeper than `max_depth` (inputs are 0).
inline Dag random_dag_bounded(std::mt19937_64& rng, int n_inputs, int n_nodes, int max_depth)
{
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> w(0.0, 3.0);
    Dag d;
    std::vector<int> depth;
    for (int i = 0; i < n_inputs; ++i) {
        const double lo = u(rng);
        d.inputs.emplace_back(lo, lo + w(rng));
        depth.push_back(0);
    }
    std::uniform_int_distribution<int> op(0, 5);
    std::vector<int> open;
    for (int i = 0; i < n_nodes; ++i) {
        open.clear();
        for (int j = 0; j < static_cast<int>(depth.size()); ++j) {
            if (depth[static_cast<std::size_t>(j)] < max_depth) {
                open.push_back(j);
            }
        }
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        const Node n{static_cast<Op>(op(rng)), open[pick(rng)], open[pick(rng)], u(rng)};
        depth.push_back(1 + std::max(depth[static_cast<std::size_t>(n.a)], depth[static_cast<std::size_t>(n.b)]));
        d.nodes.push_back(n);
    }
    return d;
}

/// Longest input-to-node path.
inline int dag_depth(const Dag& d)
{
    std::vector<int> depth(d.inputs.size(), 0);
    int deepest = 0;
    for (const auto& n : d.nodes) {
        depth.push_back(1 + std::max(depth[static_cast<std::size_t>(n.a)], depth[static_cast<std::size_t>(n.b)]));
        deepest = std::max(deepest, depth.back());
    }
    return deepest;
}

/// Affine evaluation. A division whose denominator straddles zero becomes a
/// multiplication so every DAG stays evaluable.
inline std::vector<AffineForm> eval_affine(Dag& d, AnalysisContext& ctx)
{
    std::vector<AffineForm> v;
    for (const auto& iv : d.inputs) {
        v.push_back(from_interval(iv, ctx));
    }
    for (auto& n : d.nodes) {
        const AffineForm& x = v[static_cast<std::size_t>(n.a)];
        const AffineForm& y = v[static_cast<std::size_t>(n.b)];
        if (n.op == Op::div && y.interval().contains_zero()) {
            n.op = Op::mul;
        }
        switch (n.op) {
        case Op::add: v.push_back(x + y); break;
        case Op::sub: v.push_back(x - y); break;
        case Op::mul: v.push_back(mul(x, y, ctx)); break;
        case Op::scale: v.push_back(scale(x, n.k)); break;
        case Op::add_const: v.push_back(add_constant(x, n.k)); break;
        case Op::div: v.push_back(div(x, y, ctx)); break;
        }
    }
    return v;
}

inline std::vector<double> eval_concrete(const Dag& d, const std::vector<double>& in)
{
    std::vector<double> v = in;
    for (const auto& n : d.nodes) {
        const double x = v[static_cast<std::size_t>(n.a)];
        const double y = v[static_cast<std::size_t>(n.b)];
        switch (n.op) {
        case Op::add: v.push_back(x + y); break;
        case Op::sub: v.push_back(x - y); break;
        case Op::mul: v.push_back(x * y); break;
        case Op::scale: v.push_back(x * n.k); break;
        case Op::add_const: v.push_back(x + n.k); break;
        case Op::div: v.push_back(x / y); break;
        }
    }
    return v;
}

inline bool within(const Interval& iv, double v, double rel = 1e-12)
{
    const double tol = rel * (1.0 + std::max(std::abs(iv.lo), std::abs(iv.hi)));
    return iv.lo - tol <= v && v <= iv.hi + tol;
}

/// Samples `samples` input vectors (corners first) and counts values outside
/// their affine intervals.
inline long count_violations(const Dag& d, const std::vector<AffineForm>& forms, std::mt19937_64& rng, int samples)
{
    long bad = 0;
    std::vector<double> in(d.inputs.size());
    for (int s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < in.size(); ++i) {
            const auto& iv = d.inputs[i];
            if (s < 2) {
                in[i] = s == 0 ? iv.lo : iv.hi;
            } else {
                in[i] = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
            }
        }
        const auto vals = eval_concrete(d, in);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (!within(forms[i].interval(), vals[i])) {
                ++bad;
            }
        }
    }
    return bad;
}

}  // namespace fxrange::testing
