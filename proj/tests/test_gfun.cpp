#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "wavelab/gfun.hpp"

using namespace wavelab;
namespace gf = wavelab::gfun;

namespace {

gf::GLadder build_ladder(int rungs, double a_mult = 10.0) {
    gf::GLadder ladder(a_mult);
    double c_prev = 0.0;
    for (int i = 1; i <= rungs; ++i) {
        ladder = ladder.with_rung(i, c_prev);
        c_prev = ladder.suggested_c(i);
    }
    return ladder;
}

// central finite difference with a step scaled to the argument
double fd_deriv(const gf::GFunction& g, double x) {
    const double h = std::max(x, 1.0) * 1e-6;
    return (g(x + h) - g(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("critical exponent") {
    CHECK(gf::sp_exponent(5.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gf::sp_exponent(7.0) == doctest::Approx(7.0 / 6.0).epsilon(1e-15));
    CHECK(gf::sp_exponent(4.0) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(gf::sp_exponent(3.0), DomainError);
    CHECK_THROWS_AS(gf::sp_exponent(2.0), DomainError);
    // strictly increasing, range (1/2, 3/2)
    double prev = 0.5;
    for (double p = 3.01; p < 200.0; p *= 1.5) {
        const double s = gf::sp_exponent(p);
        CHECK(s > prev);
        CHECK(s < 1.5);
        prev = s;
    }
}

TEST_CASE("derivative evaluators agree with finite differences") {
    auto shared = std::make_shared<gf::GLadder>(build_ladder(2));
    const std::vector<gf::GFunction> gs = {
        gf::GFunction::constant(2.0), gf::GFunction::log_of_square(),
        gf::GFunction::loglog_power(1.0 / 30.0), gf::GFunction::ladder_rung(shared, 2)};
    for (const auto& g : gs) {
        for (double x : {0.5, 1.7, 12.0, 300.0, 4.0e4}) {
            const double analytic = g.deriv(x);
            const double numeric = fd_deriv(g, x);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
            CHECK(std::abs(analytic - numeric) / scale < 1e-6);
        }
        CHECK(g(0.0) > 0.0);
    }
}

TEST_CASE("growth conditions: constant factor") {
    const auto report = gf::validate_conditions(gf::GFunction::constant(1.0), 1e9);
    CHECK(report.slow_growth_sup == 0.0);
    CHECK(report.curvature_sup == 0.0);
    CHECK(report.deriv_min == 0.0);
    CHECK(report.tail_verdict == gf::ConditionReport::Tail::diverges);
    // int_1^x dy/y = log x
    CHECK(report.partial_integral() == doctest::Approx(std::log(1e9)).epsilon(1e-7));
}

TEST_CASE("growth conditions: log factor has a convergent tail") {
    const auto g = gf::GFunction::log_of_square();
    const auto report = gf::validate_conditions(g, 1e9);
    // x g' = 2x^2/(2+x^2) climbs to exactly 2
    CHECK(report.slow_growth_sup <= 2.0 + 1e-12);
    CHECK(std::isfinite(report.curvature_sup));
    CHECK(report.deriv_min >= 0.0);
    CHECK(report.tail_verdict == gf::ConditionReport::Tail::converges);
    // closed-form check of the tail scale: for large y the integrand is
    // close to 1/(y (2 log y)^2) whose antiderivative is -1/(4 log y)
    const double tail_expect = 0.25 / std::log(1e6) - 0.25 / std::log(1e9);
    const double tail_measured = report.partials[2] - report.partials[1];
    CHECK(tail_measured == doctest::Approx(tail_expect).epsilon(0.05));
}

TEST_CASE("growth conditions: slow double-log power diverges") {
    const auto g = gf::GFunction::loglog_power(1.0 / 30.0);
    const auto report = gf::validate_conditions(g, 1e9);
    CHECK(report.tail_verdict == gf::ConditionReport::Tail::diverges);
    CHECK(report.slow_growth_sup < 1.0);
}

TEST_CASE("rung integral: closed forms and the fine-Simpson oracle") {
    const auto one = gf::GFunction::constant(1.0);
    CHECK(gf::rung_integral(one, 1.0, std::numbers::e) ==
          doctest::Approx(1.0).epsilon(1e-9));
    const auto two = gf::GFunction::constant(2.0);
    CHECK(gf::rung_integral(two, 1.0, std::exp(2.0)) ==
          doctest::Approx(0.5).epsilon(1e-9));

    const auto logg = gf::GFunction::log_of_square();
    const double fine = oracle::inv_y_g2(
        [](double y) { return std::log(2.0 + y * y); }, 10.0, 1000.0);
    CHECK(gf::rung_integral(logg, 10.0, 1000.0) == doctest::Approx(fine).epsilon(1e-6));

    CHECK_THROWS_AS(gf::rung_integral(one, 5.0, 2.0), DomainError);
    CHECK_THROWS_AS(gf::rung_integral(one, 0.5, 2.0), DomainError);

    // monotone in the upper limit
    double prev = 0.0;
    for (double b : {2.0, 4.0, 8.0, 64.0}) {
        const double v = gf::rung_integral(logg, 1.0, b);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("ladder construction satisfies the structural inequalities") {
    const int n_rungs = 5;
    const auto ladder = build_ladder(n_rungs);
    CHECK(ladder.rung_count() == n_rungs);

    double c_prev = 0.0;
    for (int i = 1; i <= n_rungs; ++i) {
        const auto& r = ladder.rungs()[i - 1];
        const double c_i = ladder.suggested_c(i);
        CHECK(r.c_prev == c_prev);
        if (i >= 2) CHECK(10.0 * c_prev < r.plateau_start);
        CHECK(r.plateau_start < 10.0 * c_i);
        CHECK(c_i >= i);
        c_prev = c_i;
    }

    auto shared = std::make_shared<gf::GLadder>(ladder);
    for (int i = 1; i <= n_rungs; ++i) {
        const auto& r = ladder.rungs()[i - 1];
        const auto g_i = gf::GFunction::ladder_rung(shared, i);
        // endpoint values of the bridge
        CHECK(g_i(r.bridge_start) == doctest::Approx(i).epsilon(1e-14));
        CHECK(g_i(r.plateau_start) == i + 1.0);
        // extension of the previous rung below the bridge
        for (double f : {1e-4, 0.01, 0.3, 0.999}) {
            const double x = r.bridge_start * f;
            CHECK(ladder.eval_rung(i, x) == ladder.eval_rung(i - 1, x));
        }
        // bridge slope bound x g' <= 15/(8L) <= 1
        const double slope_cap = 15.0 / (8.0 * r.log_span);
        for (int k = 0; k <= 400; ++k) {
            const double x =
                r.bridge_start * std::pow(r.plateau_start / r.bridge_start, k / 400.0);
            CHECK(x * g_i.deriv(x) <= slope_cap * (1.0 + 1e-9));
        }
        // bridge integral at least i
        const double integral =
            gf::rung_integral(g_i, std::max(1.0, r.bridge_start), r.plateau_start);
        CHECK(integral >= i * (1.0 - 1e-6));
    }
}

TEST_CASE("ladder construction preconditions are named") {
    gf::GLadder ladder(10.0);
    CHECK_THROWS_AS(ladder.with_rung(2, 1.0), ConstructionError);  // out of order
    CHECK_THROWS_AS(ladder.with_rung(1, 3.0), ConstructionError);  // C_0 must be 0
    ladder = ladder.with_rung(1, 0.0);
    CHECK_THROWS_WITH_AS(ladder.with_rung(2, 0.5),
                         doctest::Contains("C_{i-1} >= i-1"), ConstructionError);
    // C_1 too small for A C_1 to clear the first plateau
    CHECK_THROWS_WITH_AS(ladder.with_rung(2, 2.0),
                         doctest::Contains("A*C_{i-1} >= C'_{i-1}"), ConstructionError);
}

TEST_CASE("ladder evaluation: stabilisation and the needs-more-rungs error") {
    const auto ladder = build_ladder(3);
    CHECK(ladder.eval(0.0) == 1.0);

    // plateau of rung 2 carries the value 3
    const double plateau2 = ladder.rungs()[1].plateau_start;
    CHECK(ladder.eval(plateau2 * 2.0) == 3.0);

    // stabilisation: extending the ladder never changes covered values
    const auto longer = build_ladder(4);
    for (double x : {0.0, 0.5, 3.0, 100.0, 1e6, plateau2 * 10.0})
        CHECK(ladder.eval(x) == longer.eval(x));

    const double last_plateau = ladder.rungs()[2].plateau_start;
    CHECK_THROWS_AS(ladder.eval(last_plateau * 1.01), NeedsMoreRungsError);
    CHECK_THROWS_AS(gf::GLadder(10.0).eval(0.5), NeedsMoreRungsError);
}

TEST_CASE("deficit probe") {
    const auto ladder = build_ladder(2);
    const double p = 5.0;

    // vanishes past the plateau: crude bound holds
    const double probe1 = gf::h_bound_probe(ladder, 1, p);
    const double cp1 = ladder.rungs()[0].plateau_start;
    CHECK(std::isfinite(probe1));
    CHECK(probe1 <= 2.0 * std::pow(cp1, 0.5 * (p - 1.0)));

    // reproducible across probe grids to 5%
    const double dense = gf::h_bound_probe(ladder, 1, p, 65536);
    CHECK(std::abs(probe1 - dense) / dense < 0.05);
}

TEST_CASE("ladder serialization: bit-exact round trip") {
    namespace fs = std::filesystem;
    const auto ladder = build_ladder(5);
    const auto path = fs::temp_directory_path() / "wavelab_ladder_test.json";
    gf::save_ladder(ladder, path.string());
    const auto loaded = gf::load_ladder(path.string());

    CHECK(loaded.threshold_multiplier() == ladder.threshold_multiplier());
    REQUIRE(loaded.rung_count() == ladder.rung_count());
    for (int i = 0; i < ladder.rung_count(); ++i) {
        CHECK(loaded.rungs()[i].c_prev == ladder.rungs()[i].c_prev);
        CHECK(loaded.rungs()[i].plateau_start == ladder.rungs()[i].plateau_start);
        CHECK(loaded.rungs()[i].log_span == ladder.rungs()[i].log_span);
        CHECK(loaded.rungs()[i].bridge_start == ladder.rungs()[i].bridge_start);
    }
    const auto path2 = fs::temp_directory_path() / "wavelab_ladder_test2.json";
    gf::save_ladder(loaded, path2.string());
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("ladder restricted conditions accumulate the rung inequality") {
    const int n_rungs = 4;
    const auto ladder = build_ladder(n_rungs);
    auto shared = std::make_shared<gf::GLadder>(ladder);
    const auto g_top = gf::GFunction::ladder_rung(shared, n_rungs);
    const auto report =
        gf::validate_conditions(g_top, ladder.rungs().back().plateau_start);
    CHECK(report.slow_growth_sup <= 1.0);
    CHECK(report.deriv_min >= 0.0);
    double target = 0.0;
    for (int i = 1; i <= n_rungs; ++i) target += i;
    CHECK(report.partial_integral() >= target * (1.0 - 1e-6));
}
