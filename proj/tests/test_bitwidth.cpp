#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fxrange/bitwidth.hpp"
#include "fxrange/dataset.hpp"
#include "fxrange/fxsim.hpp"
#include "fxrange/range_analysis.hpp"

using namespace fxrange;

namespace {

// Independent oracle: smallest k with 2^k >= max(|lo|, |hi|) + 1, by doubling.
int int_bits_by_doubling(const Interval& iv)
{
    const double need = iv.magnitude() + 1.0;
    int k = 0;
    double cap = 1.0;
    while (cap < need) {
        cap *= 2.0;
        ++k;
    }
    return k;
}

}  // namespace

TEST_CASE("integer bits of reference intervals", "[bitwidth]")
{
    const auto f = integer_bits({-16.0, 9.0});
    CHECK(f.int_bits == 5);
    CHECK(f.is_signed);
    CHECK(f.total() == 6);

    const auto unit = integer_bits({0.0, 1.0});
    CHECK(unit.int_bits == 1);
    CHECK_FALSE(unit.is_signed);

    const auto zero = integer_bits({0.0, 0.0});
    CHECK(zero.int_bits == 0);
    CHECK(zero.total() == 0);

    const auto d = integer_bits({-2.0, 9.0});
    CHECK(d.int_bits == 4);
    CHECK(d.total() == 5);
    CHECK(integer_bits({0.5, 0.75}).int_bits == 1);
    CHECK(integer_bits({-0.25, 0.0}).total() == 2);
}

TEST_CASE("integer bits agree with a doubling oracle", "[bitwidth][property]")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> exp(-20.0, 40.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const double a = u(rng) * std::exp2(exp(rng));
        const double b = u(rng) * std::exp2(exp(rng));
        const Interval iv(std::min(a, b), std::max(a, b));
        CHECK(integer_bits(iv).int_bits == int_bits_by_doubling(iv));
    }
    for (int k = 0; k < 60; ++k) {
        const double p = std::ldexp(1.0, k);
        CHECK(integer_bits({0.0, p}).int_bits == int_bits_by_doubling({0.0, p}));
        CHECK(integer_bits({0.0, p - 1.0}).int_bits == int_bits_by_doubling({0.0, p - 1.0}));
    }
}

TEST_CASE("allocation covers every variable", "[bitwidth][property]")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    RangeReport report;
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        report.set("v" + std::to_string(i), {{std::min(a, b), std::max(a, b)}, std::nullopt});
    }
    for (int frac : {0, 4, 16}) {
        const auto table = allocate(report, frac);
        for (const auto& [name, fmt] : table) {
            const auto iv = report.at(name).allocation();
            CHECK(fmt.covers(iv));
            CHECK(iv.hi < std::ldexp(1.0, fmt.int_bits));
            CHECK(fmt.frac_bits == frac);
        }
    }
    CHECK(allocate(RangeReport{}, 16).empty());
}

TEST_CASE("allocation uses the accumulator range and extra bits", "[bitwidth]")
{
    RangeReport report;
    report.set("gamma1", {{0.0, 1.0}, Interval(-3.0, 5.0)});
    const auto plain = allocate(report, 8);
    CHECK(plain.at("gamma1") == FixedPointFormat{true, 3, 8});
    AllocationOptions opts;
    opts.frac_bits = 8;
    opts.extra_int_bits = 1;
    opts.frac_overrides["gamma1"] = 4;
    CHECK(allocate(report, opts).at("gamma1") == FixedPointFormat{true, 4, 4});
    opts.extra_int_bits = -1;
    CHECK_THROWS_AS(allocate(report, opts), std::invalid_argument);
}

TEST_CASE("multiplication count formula", "[bitwidth]")
{
    CHECK(mult_count(64, 48, 10) == 13776);
    CHECK(mult_count(1, 1, 1) == 9);
    CHECK(mult_count(4, 5, 3) == 4 * 25 + (9 + 4 + 1) * 5);
}

TEST_CASE("instrumented multiplier count matches the formula", "[bitwidth][property]")
{
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> dim(1, 12);
    for (int i = 0; i < 6; ++i) {
        const int n = dim(rng);
        const int hidden = dim(rng);
        const int m = dim(rng);
        const Dataset d = gen_synthetic(rng(), n, m, {hidden + 5, 1, 0});
        const auto w = init_weights(rng(), n, hidden);
        oselm::ModelState s;
        try {
            s = oselm::initial_state(w.alpha, w.bias, d.initial.x, d.initial.t);
        } catch (const oselm::InitSingular&) {
            continue;  // identity activation caps rank(H) at n + 1
        }
        const auto table = allocate(analyze(InputSpec::from_state(s)), 20);
        CHECK(instrumented_mult_count(s, table) == mult_count(static_cast<std::uint64_t>(n),
                                                              static_cast<std::uint64_t>(hidden),
                                                              static_cast<std::uint64_t>(m)));
    }
}

TEST_CASE("storage cost sums element count times word width", "[bitwidth]")
{
    const oselm::ModelConfig cfg{4, 5, 3, 0};
    FormatTable t;
    t.emplace("P", FixedPointFormat{true, 4, 16});
    t.emplace("x", FixedPointFormat{false, 1, 16});
    CHECK(storage_cost(t, cfg) == 25 * 21 + 4 * 17);
    CHECK(element_count("gamma10", cfg) == 15);
    CHECK(element_count("pred.y", cfg) == 3);
    CHECK_THROWS_AS(element_count("nope", cfg), std::invalid_argument);

    FormatTable wider = t;
    wider["P"].int_bits += 1;
    CHECK(storage_cost(wider, cfg) > storage_cost(t, cfg));
}

TEST_CASE("format bounds", "[bitwidth]")
{
    const FixedPointFormat s{true, 3, 2};
    CHECK(s.total_bits() == 6);
    CHECK(s.max_value() == 7.75);
    CHECK(s.min_value() == -8.0);
    CHECK(to_string(s) == "s3.2");
    const FixedPointFormat u{false, 0, 0};
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}
