#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fxrange/affine.hpp"

namespace fxrange {

/// Row-major matrix of affine forms.
class AffineMatrix {
public:
    AffineMatrix() = default;
    AffineMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), elems_(rows * cols)
    {
        if (rows == 0 || cols == 0) {
            throw std::invalid_argument("affine matrix dimensions must be positive");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return elems_.size(); }

    AffineForm& operator()(std::size_t r, std::size_t c) { return elems_[r * cols_ + c]; }
    const AffineForm& operator()(std::size_t r, std::size_t c) const { return elems_[r * cols_ + c]; }

    std::span<const AffineForm> elements() const { return elems_; }
    std::span<AffineForm> elements() { return elems_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<AffineForm> elems_;
};

/// Range covered by a running accumulator while a product is formed: the
/// initial zero, every prefix sum and every final element.
struct PartialSumTrace {
    Interval interval;
};

/// Lifts a row-major table of reals into zero-width forms.
inline AffineMatrix mat_from_reals(const Eigen::MatrixXd& m)
{
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("cannot lift an empty matrix");
    }
    AffineMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out(r, c) = AffineForm(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
    }
    return out;
}

/// Each element becomes an independent form spanning `iv`.
inline AffineMatrix mat_from_interval(std::size_t rows, std::size_t cols, const Interval& iv, AnalysisContext& ctx)
{
    AffineMatrix out(rows, cols);
    for (auto& e : out.elements()) {
        e = from_interval(iv, ctx);
    }
    return out;
}

namespace detail {

inline void require_same_shape(const AffineMatrix& a, const AffineMatrix& b, const char* op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

}  // namespace detail

inline AffineMatrix mat_add(const AffineMatrix& a, const AffineMatrix& b)
{
    detail::require_same_shape(a, b, "mat_add");
    AffineMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.elements()[i] = add(a.elements()[i], b.elements()[i]);
    }
    return out;
}

inline AffineMatrix mat_sub(const AffineMatrix& a, const AffineMatrix& b)
{
    detail::require_same_shape(a, b, "mat_sub");
    AffineMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.elements()[i] = sub(a.elements()[i], b.elements()[i]);
    }
    return out;
}

inline AffineMatrix transpose(const AffineMatrix& a)
{
    AffineMatrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            out(c, r) = a(r, c);
        }
    }
    return out;
}

/// Multiplies every element by the same form `k`; the operand is shared, not
/// re-minted, so all elements stay correlated through it.
inline AffineMatrix mat_scale(const AffineMatrix& a, const AffineForm& k, AnalysisContext& ctx)
{
    AffineMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.elements()[i] = mul(a.elements()[i], k, ctx);
    }
    return out;
}

struct ProductResult {
    AffineMatrix value;
    PartialSumTrace trace;
};

/// C = A*B, summing k = 0..v-1 in order. The trace covers every value the
/// shared accumulator holds, starting from zero.
inline ProductResult mat_mul(const AffineMatrix& a, const AffineMatrix& b, AnalysisContext& ctx)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("mat_mul: inner dimensions differ");
    }
    AffineMatrix out(a.rows(), b.cols());
    Interval trace = Interval::point(0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            AffineForm sum;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                sum = add(sum, mul(a(i, k), b(k, j), ctx));
                trace = hull(trace, sum.interval());
            }
            out(i, j) = std::move(sum);
        }
    }
    return {std::move(out), PartialSumTrace{trace}};
}

/// [min of element infs, max of element sups].
inline Interval mat_interval(const AffineMatrix& a)
{
    if (a.size() == 0) {
        throw std::invalid_argument("mat_interval of an empty matrix");
    }
    Interval out = a.elements()[0].interval();
    for (const auto& e : a.elements()) {
        out = hull(out, e.interval());
    }
    return out;
}

}  // namespace fxrange
