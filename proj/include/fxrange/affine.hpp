#pragma once

#include <atomic>
#include <cassert>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fxrange/interval.hpp"

namespace fxrange {

/// Identifier of a noise symbol. Unique within one AnalysisContext.
struct NoiseId {
    std::uint64_t value = 0;
    friend auto operator<=>(const NoiseId&, const NoiseId&) = default;
};

/// Raised when a reciprocal is requested for a form whose range contains zero.
class DenominatorStraddlesZero : public std::domain_error {
public:
    explicit DenominatorStraddlesZero(const Interval& iv)
        : std::domain_error("denominator range " + to_string(iv) + " contains zero"), range(iv)
    {
    }
    Interval range;
};

/// Knobs for one analysis run over the OS-ELM graphs.
struct AnalysisOptions {
    bool clamp_gamma5 = true;
    bool track_partial_sums = true;
    int unroll_steps = 1;
};

/// Source of fresh noise symbols for one analysis run.
///
/// Not thread-safe: one context is owned by one analysis. Forms minted by
/// different contexts must not be mixed; debug builds assert on it.
class AnalysisContext {
public:
    explicit AnalysisContext(AnalysisOptions opts = {}) : options_(opts), tag_(next_tag()) {}

    AnalysisContext(const AnalysisContext&) = delete;
    AnalysisContext& operator=(const AnalysisContext&) = delete;

    NoiseId fresh() { return NoiseId{next_id_++}; }
    std::uint64_t symbols_minted() const { return next_id_; }
    std::uint32_t tag() const { return tag_; }
    const AnalysisOptions& options() const { return options_; }

private:
    static std::uint32_t next_tag()
    {
        static std::atomic<std::uint32_t> counter{1};
        return counter.fetch_add(1, std::memory_order_relaxed);
    }

    AnalysisOptions options_;
    std::uint64_t next_id_ = 0;
    std::uint32_t tag_;
};

/// center + sum_i coeff_i * eps_i with eps_i in [-1, 1].
///
/// Terms are kept sorted by id and never hold a zero coefficient, so the
/// radius always reflects live symbols only.
class AffineForm {
public:
    struct Term {
        NoiseId id;
        double coeff;
        friend bool operator==(const Term&, const Term&) = default;
    };

    AffineForm() = default;
    explicit AffineForm(double center) : center_(center)
    {
        if (!std::isfinite(center)) {
            throw std::domain_error("affine center must be finite");
        }
    }

    double center() const { return center_; }
    std::span<const Term> terms() const { return terms_; }
    bool is_constant() const { return terms_.empty(); }
    std::uint32_t context_tag() const { return tag_; }

    double coefficient(NoiseId id) const
    {
        for (const auto& t : terms_) {
            if (t.id == id) {
                return t.coeff;
            }
        }
        return 0.0;
    }

    /// Sum of |coeff_i|.
    double radius() const
    {
        double r = 0.0;
        for (const auto& t : terms_) {
            r += std::abs(t.coeff);
        }
        return r;
    }

    Interval interval() const
    {
        const double r = radius();
        return {center_ - r, center_ + r};
    }

    /// Evaluates the form for a concrete assignment eps(id) in [-1, 1].
    template <class EpsFn>
    double evaluate(EpsFn&& eps) const
    {
        double v = center_;
        for (const auto& t : terms_) {
            v += t.coeff * eps(t.id);
        }
        return v;
    }

    friend bool operator==(const AffineForm& a, const AffineForm& b)
    {
        return a.center_ == b.center_ && a.terms_ == b.terms_;
    }

    // Construction helpers used by the free functions below. They expect
    // sorted, zero-free terms.
    static AffineForm from_parts(double center, std::vector<Term> terms, std::uint32_t tag)
    {
        AffineForm f(center);
        f.terms_ = std::move(terms);
        f.tag_ = f.terms_.empty() ? 0 : tag;
        return f;
    }

    // Appends a freshly minted symbol; its id is larger than every stored id.
    void append_fresh(NoiseId id, double coeff, std::uint32_t tag)
    {
        if (coeff == 0.0) {
            return;
        }
        assert(terms_.empty() || terms_.back().id < id);
        assert(tag_ == 0 || tag_ == tag);
        terms_.push_back({id, coeff});
        tag_ = tag;
    }

private:
    double center_ = 0.0;
    std::vector<Term> terms_;
    std::uint32_t tag_ = 0;
};

namespace detail {

inline std::uint32_t merged_tag(const AffineForm& x, const AffineForm& y)
{
    assert(x.context_tag() == 0 || y.context_tag() == 0 || x.context_tag() == y.context_tag());
    return x.context_tag() != 0 ? x.context_tag() : y.context_tag();
}

// Returns the term list of a*x + b*y (centers excluded).
inline std::vector<AffineForm::Term> combine_terms(const AffineForm& x, double a, const AffineForm& y, double b)
{
    const auto xs = x.terms();
    const auto ys = y.terms();
    std::vector<AffineForm::Term> out;
    out.reserve(xs.size() + ys.size() + 1);
    std::size_t i = 0;
    std::size_t j = 0;
    auto push = [&out](NoiseId id, double c) {
        if (c != 0.0) {
            out.push_back({id, c});
        }
    };
    while (i < xs.size() && j < ys.size()) {
        if (xs[i].id < ys[j].id) {
            push(xs[i].id, a * xs[i].coeff);
            ++i;
        } else if (ys[j].id < xs[i].id) {
            push(ys[j].id, b * ys[j].coeff);
            ++j;
        } else {
            push(xs[i].id, a * xs[i].coeff + b * ys[j].coeff);
            ++i;
            ++j;
        }
    }
    for (; i < xs.size(); ++i) {
        push(xs[i].id, a * xs[i].coeff);
    }
    for (; j < ys.size(); ++j) {
        push(ys[j].id, b * ys[j].coeff);
    }
    return out;
}

}  // namespace detail

/// Converts [lo, hi] to (hi+lo)/2 + (hi-lo)/2 * eps_new. A point interval
/// becomes a constant and consumes no symbol.
inline AffineForm from_interval(double lo, double hi, AnalysisContext& ctx)
{
    const Interval iv(lo, hi);
    AffineForm f((iv.hi + iv.lo) / 2.0);
    if (iv.hi > iv.lo) {
        f.append_fresh(ctx.fresh(), (iv.hi - iv.lo) / 2.0, ctx.tag());
    }
    return f;
}

inline AffineForm from_interval(const Interval& iv, AnalysisContext& ctx) { return from_interval(iv.lo, iv.hi, ctx); }

inline Interval interval(const AffineForm& x) { return x.interval(); }

inline AffineForm add(const AffineForm& x, const AffineForm& y)
{
    return AffineForm::from_parts(x.center() + y.center(), detail::combine_terms(x, 1.0, y, 1.0), detail::merged_tag(x, y));
}

inline AffineForm sub(const AffineForm& x, const AffineForm& y)
{
    return AffineForm::from_parts(x.center() - y.center(), detail::combine_terms(x, 1.0, y, -1.0), detail::merged_tag(x, y));
}

inline AffineForm scale(const AffineForm& x, double k)
{
    return AffineForm::from_parts(x.center() * k, detail::combine_terms(x, k, AffineForm{}, 0.0), x.context_tag());
}

inline AffineForm add_constant(const AffineForm& x, double c)
{
    return AffineForm::from_parts(x.center() + c, {x.terms().begin(), x.terms().end()}, x.context_tag());
}

inline AffineForm operator+(const AffineForm& x, const AffineForm& y) { return add(x, y); }
inline AffineForm operator-(const AffineForm& x, const AffineForm& y) { return sub(x, y); }
inline AffineForm operator-(const AffineForm& x) { return scale(x, -1.0); }

/// x0*y0 + sum (x0*y_i + y0*x_i) eps_i + u*v*eps_new with u = sum|x_i|,
/// v = sum|y_i|. The new symbol is skipped when u*v is zero, so scaling by a
/// constant stays exact.
inline AffineForm mul(const AffineForm& x, const AffineForm& y, AnalysisContext& ctx)
{
    const std::uint32_t tag = detail::merged_tag(x, y);
    assert(tag == 0 || tag == ctx.tag());
    auto f = AffineForm::from_parts(x.center() * y.center(), detail::combine_terms(x, y.center(), y, x.center()), tag);
    const double q = x.radius() * y.radius();
    if (q != 0.0) {
        f.append_fresh(ctx.fresh(), q, ctx.tag());
    }
    return f;
}

/// Min-max affine approximation of 1/y.
///
/// For a = inf(y), b = sup(y) with 0 < a < b the slope is p = -1/b^2 and the
/// residual 1/y - p*y spans [2/b, 1/a + a/b^2], giving
/// q = (a+b)^2 / (2ab^2) and d = (a-b)^2 / (2ab^2). A negative range is
/// handled through 1/y = -(1/(-y)).
inline AffineForm recip(const AffineForm& y, AnalysisContext& ctx)
{
    const Interval iv = y.interval();
    if (iv.contains_zero()) {
        throw DenominatorStraddlesZero(iv);
    }
    if (iv.lo == iv.hi) {
        return AffineForm(1.0 / y.center());
    }
    const bool negative = iv.hi < 0.0;
    const double a = negative ? -iv.hi : iv.lo;
    const double b = negative ? -iv.lo : iv.hi;
    const double p = -1.0 / (b * b);
    const double q = (a + b) * (a + b) / (2.0 * a * b * b);
    const double d = (a - b) * (a - b) / (2.0 * a * b * b);
    // Slope is identical for y and -y; only the constant flips sign.
    const double center = p * y.center() + (negative ? -q : q);
    auto f = AffineForm::from_parts(center, detail::combine_terms(y, p, AffineForm{}, 0.0), y.context_tag());
    if (d != 0.0) {
        f.append_fresh(ctx.fresh(), d, ctx.tag());
    }
    return f;
}

inline AffineForm div(const AffineForm& x, const AffineForm& y, AnalysisContext& ctx)
{
    return mul(x, recip(y, ctx), ctx);
}

}  // namespace fxrange
