#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fxrange/dataset.hpp"
#include "fxrange/fxsim.hpp"
#include "fxrange/range_analysis.hpp"

using namespace fxrange;
using Eigen::MatrixXd;

namespace {

FixedPointFormat fmt(bool s, int i, int f) { return {s, i, f}; }

struct Run {
    oselm::ModelState state;
    Dataset data;
};

Run seeded_run(std::uint64_t seed, int n, int hidden, int m, int initial, int online)
{
    Dataset d = gen_synthetic(derive_seed(seed, SeedStream::dataset), n, m, {initial, online, 0});
    auto w = init_weights(derive_seed(seed, SeedStream::weights), n, hidden);
    auto s = oselm::initial_state(w.alpha, w.bias, d.initial.x, d.initial.t);
    return {std::move(s), std::move(d)};
}

}  // namespace

TEST_CASE("quantization rounds to the grid", "[fixed]")
{
    EventCounters c;
    CHECK(fx_quantize(0.5, fmt(false, 1, 1), c).raw == 1);
    CHECK(fx_quantize(0.375, fmt(false, 1, 2), c).raw == 2);    // tie away from zero
    CHECK(fx_quantize(-0.375, fmt(true, 1, 2), c).raw == -2);
    CHECK(fx_quantize(0.3, fmt(false, 1, 2), c).raw == 1);
    CHECK(c.events() == 0);
}

TEST_CASE("quantization saturates and counts overflows", "[fixed]")
{
    EventCounters c;
    const auto v = fx_quantize(300.0, fmt(true, 8, 0), c);
    CHECK(v.raw == 255);
    CHECK(c.overflows == 1);
    const auto w = fx_quantize(-300.0, fmt(true, 8, 0), c);
    CHECK(w.raw == -256);
    CHECK(fx_quantize(-1.0, fmt(false, 4, 0), c).raw == 0);
    CHECK(c.overflows == 3);
    CHECK_THROWS_AS(fx_quantize(NAN, fmt(true, 8, 0), c), std::domain_error);
}

TEST_CASE("tiny values flush to zero as underflows", "[fixed]")
{
    EventCounters c;
    CHECK(fx_quantize(1e-9, fmt(false, 1, 16), c).raw == 0);
    CHECK(c.underflows == 1);
    CHECK(fx_quantize(0.0, fmt(false, 1, 16), c).raw == 0);
    CHECK(c.underflows == 1);
    // Exactly half an ulp rounds away from zero.
    CHECK(fx_quantize(std::ldexp(1.0, -17), fmt(false, 1, 16), c).raw == 1);
    CHECK(c.underflows == 1);
}

TEST_CASE("arithmetic examples", "[fixed]")
{
    EventCounters c;
    const auto f = fmt(true, 4, 4);
    const auto a = fx_quantize(1.5, f, c);
    const auto b = fx_quantize(2.25, f, c);
    CHECK(fx_add(a, b, f, c).value() == 3.75);
    CHECK(fx_sub(a, b, f, c).value() == -0.75);
    CHECK(fx_mul(a, b, fmt(true, 4, 6), c).value() == 3.375);
    CHECK(fx_mul(a, b, f, c).value() == 3.375);  // 3.375 is on the 1/16 grid

    const auto q = fmt(false, 2, 2);
    CHECK(fx_div(fx_quantize(3.0, q, c), fx_quantize(4.0, fmt(false, 3, 0), c), q, c).value() == 0.75);
    CHECK(c.events() == 0);
    CHECK(c.ops_add == 2);
    CHECK(c.ops_mul == 2);
    CHECK(c.ops_div == 1);
}

TEST_CASE("multiplication saturates at the format limit", "[fixed]")
{
    EventCounters c;
    const auto f = fmt(true, 6, 0);
    const auto top = fx_quantize(63.0, f, c);
    const auto r = fx_mul(top, fx_constant(2), f, c);
    CHECK(r.raw == 63);
    CHECK(c.overflows == 1);
}

TEST_CASE("division by zero saturates and counts", "[fixed]")
{
    EventCounters c;
    const auto f = fmt(true, 3, 4);
    const FxNum zero{0, f};
    CHECK(fx_div(fx_quantize(1.0, f, c), zero, f, c).value() == f.max_value());
    CHECK(fx_div(fx_quantize(-1.0, f, c), zero, f, c).value() == f.min_value());
    CHECK(fx_div(zero, zero, f, c).raw == 0);
    CHECK(c.overflows == 3);
}

TEST_CASE("mac rounds once into the accumulator format", "[fixed]")
{
    EventCounters c;
    const auto in = fmt(false, 1, 3);
    const auto acc_fmt = fmt(false, 2, 3);
    FxNum acc{0, acc_fmt};
    const auto a = fx_quantize(0.625, in, c);
    const auto b = fx_quantize(0.375, in, c);
    acc = fx_mac(acc, a, b, c);  // 0.234375 -> 0.25
    CHECK(acc.value() == 0.25);
    acc = fx_mac(acc, a, b, c);  // 0.484375 -> 0.5
    CHECK(acc.value() == 0.5);
    CHECK(c.ops_mul == 2);
    CHECK(c.ops_add == 2);
}

TEST_CASE("formats beyond the simulator width are rejected", "[fixed]")
{
    EventCounters c;
    CHECK_THROWS_AS(fx_quantize(1.0, fmt(true, 40, 30), c), std::invalid_argument);
    CHECK_THROWS_AS(fx_quantize(1.0, fmt(true, 1, 33), c), std::invalid_argument);
}

TEST_CASE("quantize agrees with a scaled-rounding oracle", "[fixed][property]")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    const auto f = fmt(true, 3, 10);
    for (int i = 0; i < 20000; ++i) {
        EventCounters c;
        const double v = u(rng);
        const auto q = fx_quantize(v, f, c);
        const double oracle = std::clamp(std::round(v * 1024.0), -8192.0, 8191.0);
        CHECK(static_cast<double>(q.raw) == oracle);
        CHECK(std::abs(q.value() - v) <= (c.overflows ? 8.0 : f.ulp() / 2));
    }
}

TEST_CASE("aa formats survive a full simulated run", "[fxsim]")
{
    auto [s, d] = seeded_run(13, 4, 5, 3, 30, 90);
    const auto table = allocate(analyze(InputSpec::from_state(s)), 16);
    const auto c = run_fx_training(s, d.online.x, d.online.t, table, 20, 1);
    CHECK(c.overflows == 0);
    CHECK(c.total_ops() > 0);
}

TEST_CASE("starved formats produce events", "[fxsim]")
{
    auto [s, d] = seeded_run(13, 4, 5, 3, 30, 90);
    auto table = allocate(analyze(InputSpec::from_state(s)), 16);
    for (auto& [name, f] : table) {
        f.int_bits = std::max(0, f.int_bits - 2);
    }
    const auto c = run_fx_training(s, d.online.x, d.online.t, table, 20, 1);
    CHECK(c.overflows > 0);
    CHECK(event_rate_percent(c.overflows, c) > 0.0);
}

TEST_CASE("zero probes count only the training ops", "[fxsim]")
{
    auto [s, d] = seeded_run(14, 4, 5, 3, 30, 10);
    const auto table = allocate(analyze(InputSpec::from_state(s)), 16);
    const auto c = run_fx_training(s, d.online.x, d.online.t, table, 0, 1);
    // Per step: x alpha, P h^T, h P, g1 g2, g2 h^T, P' h^T, h beta, g7 g9.
    const std::uint64_t k = 5, n = 4, m = 3;
    CHECK(c.ops_mul == 10 * (n * k + 4 * k * k + k + 2 * k * m));
    CHECK(c.ops_div == 10 * k * k);
}

TEST_CASE("fixed-point training converges to the reference", "[fxsim][property]")
{
    for (std::uint64_t seed : {2u, 3u}) {
        auto [s, d] = seeded_run(seed, 4, 5, 3, 30, 100);
        const auto table = allocate(analyze(InputSpec::from_state(s)), 24);
        EventCounters c;
        const auto fx = fx_train(s, d.online.x, d.online.t, table, c);
        auto ref = s;
        for (Eigen::Index i = 0; i < d.online.x.rows(); ++i) {
            oselm::advance(ref, oselm::train_step(ref, d.online.x.row(i), d.online.t.row(i)));
        }
        const double dev = (fx.beta.to_real() - ref.beta).cwiseAbs().maxCoeff();
        CHECK(dev <= std::ldexp(1.0, -12));
    }
}
