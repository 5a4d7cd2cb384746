#include <doctest.h>

#include <cmath>

#include "hmlab/carleson.hpp"
#include "hmlab/errors.hpp"
#include "hmlab/geometry.hpp"
#include "hmlab/rng.hpp"
#include "support/oracles.hpp"

using namespace hmlab;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

TEST_CASE("box-disc area: closed cases and Monte Carlo cross-check") {
    // box inside the disc
    CHECK(box_disc_area({{-0.1, -0.1}, {0.1, 0.1}}, {0.0, 0.0}, 1.0) ==
          doctest::Approx(0.04).epsilon(1e-12));
    // box outside
    CHECK(box_disc_area({{2.0, 2.0}, {3.0, 3.0}}, {0.0, 0.0}, 1.0) == 0.0);
    // quarter disc
    CHECK(box_disc_area({{0.0, 0.0}, {2.0, 2.0}}, {0.0, 0.0}, 1.0) ==
          doctest::Approx(kPi / 4.0).epsilon(1e-12));
    // random boxes vs quadrature oracle
    CounterRng rng(4, 44);
    for (int i = 0; i < 20; ++i) {
        Vec2 lo{rng.uniform(-1.5, 0.5), rng.uniform(-1.5, 0.5)};
        Box2 box{lo, {lo.x + rng.uniform(0.1, 1.5), lo.y + rng.uniform(0.1, 1.5)}};
        double exact = box_disc_area(box, {0.0, 0.0}, 1.0);
        double quad = oracles::disc_quadrature({0.0, 0.0}, 1.0, 801, [&](Vec2 p) {
            return box.contains(p) ? 1.0 : 0.0;
        });
        CHECK(exact == doctest::Approx(quad).epsilon(0.02));
    }
}

TEST_CASE("grad_estimate: exact for linear, quadratic FD, Richardson order") {
    auto lin = HarmonicFunctionHandle::analytic(
        [](Vec2 p) { return 2.0 * p.x - 3.0 * p.y; },
        [](Vec2) { return Vec2{2.0, -3.0}; }, 100.0);
    GradEstimate g = grad_estimate(lin, {0.3, 0.4}, 0.5);
    CHECK(g.grad.x == 2.0);
    CHECK(g.grad.y == -3.0);

    // u = Re(z^2)/10 via finite differences (no exact gradient registered)
    auto quad = HarmonicFunctionHandle::analytic(
        [](Vec2 p) { return (p.x * p.x - p.y * p.y) / 10.0; }, nullptr, 100.0);
    GradEstimate gq = grad_estimate(quad, {0.7, -0.2}, 1e-4);
    CHECK(std::abs(gq.grad.x - 2.0 * 0.7 / 10.0) < 1e-9);
    CHECK(std::abs(gq.grad.y + 2.0 * -0.2 / 10.0) < 1e-9);

    // Richardson: central differences are second order (error ratio ~ 4)
    auto cub = HarmonicFunctionHandle::analytic(
        [](Vec2 p) { return p.x * p.x * p.x - 3.0 * p.x * p.y * p.y; }, nullptr, 100.0);
    Vec2 at{0.5, 0.3};
    double exact = 3.0 * at.x * at.x - 3.0 * at.y * at.y;
    double e1 = std::abs(grad_estimate(cub, at, 0.1).grad.x - exact);
    double e2 = std::abs(grad_estimate(cub, at, 0.05).grad.x - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("grad_estimate precondition near the boundary") {
    static Domain disc = make_disc(1.0);
    HarmonicFunctionHandle u =
        HarmonicFunctionHandle::wos_region(disc, BoundaryRegion::whole_boundary(disc), 500,
                                           1e-4, 1);
    CHECK_THROWS_AS(grad_estimate(u, {0.95, 0.0}, 0.1), PreconditionError);
}

TEST_CASE("carleson functional: constant function gives zero") {
    Domain hp = make_half_plane_window(64.0);
    auto u = HarmonicFunctionHandle::analytic([](Vec2) { return 0.25; },
                                              [](Vec2) { return Vec2{0.0, 0.0}; }, 0.25);
    CarlesonReport rep = carleson_functional(hp, u, {0.0, 0.0}, 1.0, 1.0 / 256);
    CHECK(rep.value == 0.0);
}

TEST_CASE("carleson functional: half-plane closed form 2/pi^2") {
    Domain hp = make_half_plane_window(64.0);
    auto u = HarmonicFunctionHandle::halfplane_angle();
    CarlesonReport rep = carleson_functional(hp, u, {0.0, 0.0}, 1.0, 1.0 / 256);
    double want = 2.0 / (kPi * kPi);
    CHECK(std::abs(rep.value - want) / want < 0.05);
    // translation invariance along the axis
    CarlesonReport rep2 = carleson_functional(
        hp, HarmonicFunctionHandle::analytic(
                [](Vec2 p) { return std::atan2(p.y, p.x - 0.5) / kPi; },
                [](Vec2 p) {
                    Vec2 q{p.x - 0.5, p.y};
                    double r2 = q.norm2();
                    return Vec2{-q.y / (kPi * r2), q.x / (kPi * r2)};
                },
                1.0),
        {0.5, 0.0}, 1.0, 1.0 / 256);
    CHECK(std::abs(rep2.value - want) / want < 0.05);
    // numerator monotone in r
    CarlesonReport rep_r2 = carleson_functional(hp, u, {0.0, 0.0}, 2.0, 1.0 / 256);
    CHECK(rep_r2.value * 2.0 >= rep.value * 1.0 - 1e-9);
    // scale invariance of the normalized value on the half-plane
    CHECK(std::abs(rep_r2.value - want) / want < 0.05);
}

TEST_CASE("dist integral: single point mass gives 2 pi") {
    Domain dot = make_custom({make_dot({0.0, 0.0}, "p")}, {{0.0, 0.0}, 8.0}, {});
    DistIntegralReport rep = dist_integral(dot, {0.0, 0.0}, 1.0, 20'000'000, 1.0 / 512);
    CHECK(std::abs(rep.value - 2.0 * kPi) / (2.0 * kPi) < 0.03);
    CHECK(rep.cells > 0);
}

TEST_CASE("dist integral on a small cantor domain runs and reports") {
    Domain dom = make_cantor({0.3, 2}, 4.0);
    DistIntegralReport rep = dist_integral(dom, {0.0, 0.0}, 1.0, 20'000'000, 1.0 / 256);
    CHECK(rep.value > 0.0);
    CHECK(rep.refine_values.size() == 3);
    // finite-level boundaries have positive length, so refining the cutoff
    // keeps adding mass
    CHECK(rep.refine_values[2] >= rep.refine_values[1]);
}

TEST_CASE("eps approximant: trivial cases") {
    Domain hp = make_half_plane_window(16.0);
    auto uc = HarmonicFunctionHandle::analytic([](Vec2) { return 0.4; },
                                               [](Vec2) { return Vec2{0.0, 0.0}; }, 0.4);
    EpsApproximant g = eps_approximant(hp, uc, 0.05, {{0.0, 0.0}, 1.0}, 1.0 / 64);
    CHECK(g.success);
    CHECK(g.bv_ratio == 0.0);
    // eps at least twice the sup norm: zero works
    EpsApproximant g0 = eps_approximant(hp, uc, 1.0, {{0.0, 0.0}, 1.0}, 1.0 / 64);
    CHECK(g0.success);
    CHECK(g0.bv_ratio == 0.0);
    CHECK(g0.cells.empty());
}

TEST_CASE("eps approximant: half-plane angle at eps 0.1") {
    Domain hp = make_half_plane_window(64.0);
    auto u = HarmonicFunctionHandle::halfplane_angle();
    EpsApproximant g = eps_approximant(hp, u, 0.1, {{0.0, 0.0}, 1.0}, 1.0 / 1024);
    CHECK(g.success);
    CHECK(g.bv_ratio > 0.0);
    CHECK(std::isfinite(g.bv_ratio));
    // sampled (1.2): |u - g| < eps on interior points
    CounterRng rng(8, 80);
    int checked = 0;
    for (int i = 0; i < 20000 && checked < 2000; ++i) {
        Vec2 p{rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)};
        double gv = g.eval(p);
        if (std::isnan(gv)) continue;
        ++checked;
        REQUIRE(std::abs(u.f(p) - gv) < 0.1);
    }
    CHECK(checked > 500);
    // stability under region doubling
    EpsApproximant g2 = eps_approximant(hp, u, 0.1, {{0.0, 0.0}, 2.0}, 1.0 / 1024);
    CHECK(g2.success);
    CHECK(g2.bv_ratio < 4.0 * g.bv_ratio + 1.0);
    CHECK(g.bv_ratio < 4.0 * g2.bv_ratio + 1.0);
}
