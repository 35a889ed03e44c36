#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wavelab/profiles.hpp"
#include "wavelab/radial.hpp"
#include "wavelab/spectral.hpp"

using namespace wavelab;
namespace sp = wavelab::spectral;

namespace {

GridPtr test_grid(int n = 256, double radius = 20.0) { return RadialGrid::create(n, radius); }

double max_gap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid invariants") {
    auto grid = test_grid(64, 10.0);
    CHECK(grid->nodes().front() > 0.0);
    CHECK(grid->nodes().back() < 10.0);
    for (size_t j = 1; j < grid->nodes().size(); ++j) {
        CHECK(grid->nodes()[j] > grid->nodes()[j - 1]);
        CHECK(grid->wavenumbers()[j] > grid->wavenumbers()[j - 1]);
    }
    CHECK(grid->wavenumbers().front() == doctest::Approx(std::numbers::pi / 10.0));
    CHECK_THROWS_AS(RadialGrid::create(100, 10.0), DomainError);  // not a power of two
    CHECK_THROWS_AS(RadialGrid::create(4, 10.0), DomainError);
    CHECK_THROWS_AS(RadialGrid::create(64, -1.0), DomainError);
}

TEST_CASE("sine transform: zero field") {
    auto grid = test_grid();
    auto field = RadialField::zero(grid);
    for (const auto& c : field.coeffs()) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("sine transform: single basis mode") {
    auto grid = test_grid();
    const double k1 = grid->wavenumbers()[0];
    std::vector<cplx> values(grid->nodes().size());
    for (size_t j = 0; j < values.size(); ++j)
        values[j] = std::sin(k1 * grid->nodes()[j]) / grid->nodes()[j];
    auto coeffs = sine_analyze(values, *grid);
    CHECK(std::abs(coeffs[0] - cplx(1.0, 0.0)) < 1e-12);
    for (size_t n = 1; n < coeffs.size(); ++n) CHECK(std::abs(coeffs[n]) < 1e-12);
}

TEST_CASE("sine transform: matches the direct sine-sum oracle and round trips") {
    auto grid = test_grid(128, 17.0);
    profiles::GaussianSampler rng(7);
    std::vector<cplx> values(static_cast<size_t>(grid->size()));
    for (auto& v : values) v = cplx(rng.next(), rng.next());

    const auto fast = sine_analyze(values, *grid);
    const auto direct = oracle::naive_sine_analyze(values, grid->radius());
    CHECK(max_gap(fast, direct) < 1e-11);

    const auto back = sine_synthesize(fast, *grid);
    double scale = 0.0;
    for (const auto& v : values) scale = std::max(scale, std::abs(v));
    CHECK(max_gap(back, values) < 1e-12 * scale);

    CHECK_THROWS_AS(sine_analyze(std::vector<cplx>(7), *grid), StructuralError);
}

TEST_CASE("fractional derivative: identity, eigenfunction, multiplier, composition") {
    auto grid = test_grid();
    auto field = profiles::random_smooth(grid, 11, 1.0).u;

    const auto same = sp::fractional_derivative(field, 0.0);
    CHECK(max_gap(same.coeffs(), field.coeffs()) == 0.0);

    const double k3 = grid->wavenumbers()[2];
    auto mode3 = profiles::eigenmode(grid, 3).u;
    const auto lap = sp::fractional_derivative(mode3, 2.0);
    for (size_t n = 0; n < lap.coeffs().size(); ++n)
        CHECK(std::abs(lap.coeffs()[n] - k3 * k3 * mode3.coeffs()[n]) < 1e-12 * k3 * k3);

    const double k2 = grid->wavenumbers()[1];
    auto mode2 = profiles::eigenmode(grid, 2).u;
    const auto half = sp::fractional_derivative(mode2, 0.5);
    CHECK(std::abs(half.coeffs()[1] - std::sqrt(k2)) < 1e-13);

    const auto ab = sp::fractional_derivative(sp::fractional_derivative(field, 0.7), 0.9);
    const auto sum = sp::fractional_derivative(field, 1.6);
    CHECK(max_gap(ab.coeffs(), sum.coeffs()) < 1e-13);

    CHECK_THROWS_AS(sp::fractional_derivative(field, 4.5), DomainError);
    CHECK_THROWS_AS(sp::fractional_derivative(field, -2.5), DomainError);
}

TEST_CASE("sobolev norm: eigenmode closed form and quadrature oracle") {
    auto grid = test_grid(512, 20.0);
    const double radius = grid->radius();
    const double k1 = grid->wavenumbers()[0];
    auto mode = profiles::eigenmode(grid, 1).u;

    for (double s : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
        const double expect = std::sqrt(2.0 * std::numbers::pi * radius) * std::pow(k1, s);
        CHECK(sp::sobolev_norm(mode, s) == doctest::Approx(expect).epsilon(1e-12));
    }
    // independent route: 4 pi int |D^s u|^2 r^2 dr with D^s u = k1^s sin(k1 r)/r
    const double quad = std::sqrt(oracle::radial_integral(
        [k1](double r) {
            const double u = r == 0.0 ? k1 : std::sin(k1 * r) / r;
            return u * u;
        },
        radius));
    CHECK(sp::sobolev_norm(mode, 0.0) == doctest::Approx(quad).epsilon(1e-10));

    CHECK(sp::sobolev_norm(RadialField::zero(grid), 1.3) == 0.0);
    CHECK_THROWS_AS(sp::sobolev_norm(mode, 4.2), DomainError);
}

TEST_CASE("lebesgue norm: closed-form volume, max norm, domain error") {
    auto grid = test_grid(1024, 20.0);
    const double radius = grid->radius();
    std::vector<cplx> ones(static_cast<size_t>(grid->size()), cplx(1.0, 0.0));
    auto unit = RadialField::from_values(grid, ones);

    const double expect = std::sqrt(4.0 * std::numbers::pi * radius * radius * radius / 3.0);
    CHECK(sp::lebesgue_norm(unit, 2.0) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(sp::lebesgue_norm(unit, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0));

    CHECK(sp::lebesgue_norm(RadialField::zero(grid), 2.0) == 0.0);
    CHECK_THROWS_AS(sp::lebesgue_norm(unit, 0.5), DomainError);
}

TEST_CASE("plancherel: spectral and quadrature L2 agree on smooth fields") {
    // the trapezoid error on |w|^2 scales like h^4; N = 4096 puts a smooth
    // low-mode field well below 1e-10
    auto fine = test_grid(4096, 20.0);
    auto field = profiles::random_smooth(fine, 3, 1.0, 16, 3.0).u;
    const double plancherel = sp::sobolev_norm(field, 0.0);
    const double quadrature = sp::lebesgue_norm(field, 2.0);
    CHECK(quadrature == doctest::Approx(plancherel).epsilon(1e-10));

    auto grid = test_grid(1024, 20.0);
    auto rough = profiles::random_smooth(grid, 5, 1.0, 96, 16.0).u;
    CHECK(sp::lebesgue_norm(rough, 2.0) ==
          doctest::Approx(sp::sobolev_norm(rough, 0.0)).epsilon(1e-6));
}

TEST_CASE("norm homogeneity under scalar multiplication") {
    auto grid = test_grid();
    auto field = profiles::random_smooth(grid, 17, 0.8).u;
    const cplx c(2.5, -1.25);
    auto scaled = field.scaled(c);
    const double mag = std::abs(c);
    CHECK(sp::sobolev_norm(scaled, 1.2) ==
          doctest::Approx(mag * sp::sobolev_norm(field, 1.2)).epsilon(1e-13));
    CHECK(sp::lebesgue_norm(scaled, 3.0) ==
          doctest::Approx(mag * sp::lebesgue_norm(field, 3.0)).epsilon(1e-13));
    CHECK(sp::lebesgue_norm(scaled, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(mag * sp::lebesgue_norm(field, std::numeric_limits<double>::infinity()))
              .epsilon(1e-13));
}

TEST_CASE("htilde norms") {
    auto grid = test_grid(512, 20.0);
    CHECK(sp::htilde_norms(WaveState::zero(grid), 5.0) ==
          std::pair<double, double>{0.0, 0.0});

    // p = 5 pins the critical exponent at 1
    auto state = profiles::random_smooth(grid, 23, 1.0);
    const auto [h2, h1] = sp::htilde_norms(state, 5.0);
    CHECK(h2 == doctest::Approx(sp::sobolev_norm(state.u, 2.0) +
                                sp::sobolev_norm(state.u, 1.0))
                    .epsilon(1e-14));
    CHECK(h1 == doctest::Approx(sp::sobolev_norm(state.ut, 1.0) +
                                sp::sobolev_norm(state.ut, 0.0))
                    .epsilon(1e-14));

    // p = 7: single-mode closed form with s_p = 7/6
    auto mode = profiles::eigenmode(grid, 1);
    const double k1 = grid->wavenumbers()[0];
    const auto [a, b] = sp::htilde_norms(mode, 7.0);
    const double expect = std::sqrt(2.0 * std::numbers::pi * grid->radius()) *
                          (k1 * k1 + std::pow(k1, 7.0 / 6.0));
    CHECK(a == doctest::Approx(expect).epsilon(1e-12));
    CHECK(b == 0.0);
}

TEST_CASE("sobolev embedding probe") {
    auto grid = test_grid(512, 20.0);
    auto mode = profiles::eigenmode(grid, 1).u;
    const double ratio = sp::sobolev_embedding_probe(mode, 5.0);
    CHECK(std::isfinite(ratio));
    CHECK(ratio > 0.0);

    // stable under resolution doubling
    auto grid2 = test_grid(1024, 20.0);
    const double ratio2 = sp::sobolev_embedding_probe(profiles::eigenmode(grid2, 1).u, 5.0);
    CHECK(ratio2 / ratio < 2.0);
    CHECK(ratio / ratio2 < 2.0);

    // invariant under scaling
    CHECK(sp::sobolev_embedding_probe(mode.scaled(cplx(3.0, 0.0)), 5.0) ==
          doctest::Approx(ratio).epsilon(1e-13));

    // finite over an ensemble
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        auto f = profiles::random_smooth(grid, 100 + i, 1.0).u;
        worst = std::max(worst, sp::sobolev_embedding_probe(f, 5.0));
    }
    CHECK(std::isfinite(worst));

    CHECK_THROWS_AS(sp::sobolev_embedding_probe(RadialField::zero(grid), 5.0), DomainError);
}

TEST_CASE("field evaluation matches nodes and vanishes at the boundary") {
    auto grid = test_grid(128, 10.0);
    auto field = profiles::random_smooth(grid, 31, 1.0).u;
    for (int j : {0, 17, 100})
        CHECK(std::abs(field.eval(grid->nodes()[j]) - field.values()[j]) < 1e-11);
    CHECK(std::abs(field.eval(grid->radius())) == 0.0);
}
