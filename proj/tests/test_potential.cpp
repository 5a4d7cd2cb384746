#include <doctest.h>

#include <cmath>

#include "hmlab/errors.hpp"
#include "hmlab/geometry.hpp"
#include "hmlab/potential.hpp"
#include "support/oracles.hpp"

using namespace hmlab;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

TEST_CASE("poisson_halfplane oracle values") {
    // subtended angle pi/2 over pi
    CHECK(poisson_halfplane({0.0, 1.0}, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    // whole axis limit
    CHECK(poisson_halfplane({0.3, 0.7}, -1e9, 1e9) == doctest::Approx(1.0).epsilon(1e-6));
    // mirror symmetry
    CHECK(poisson_halfplane({0.4, 1.3}, -0.2, 0.9) ==
          doctest::Approx(poisson_halfplane({-0.4, 1.3}, -0.9, 0.2)).epsilon(1e-14));
    CHECK_THROWS_AS(poisson_halfplane({0.0, 0.0}, -1.0, 1.0), PreconditionError);
}

TEST_CASE("wos disc arcs match rotational symmetry") {
    double thetas[3] = {kPi / 6, kPi / 2, kPi};
    for (double th : thetas) {
        Domain disc = make_disc(1.0, {0.0, th});
        BoundaryRegion arc = BoundaryRegion::by_label_prefix(disc, "arc0");
        MeasureEstimate e = wos_measure(disc, {0.0, 0.0}, arc, 1e-4, 20000, 42);
        double want = th / (2.0 * kPi);
        CHECK(std::abs(e.value - want) <= 3.0 * e.stderr_ + 2e-3);
        CHECK(e.stderr_ <= 0.005);
    }
}

TEST_CASE("wos whole boundary is exactly 1") {
    Domain disc = make_disc(1.0);
    MeasureEstimate e =
        wos_measure(disc, {0.2, 0.1}, BoundaryRegion::whole_boundary(disc), 1e-4, 2000, 7);
    CHECK(e.value == 1.0);
    CHECK(e.capped_paths == 0);
}

TEST_CASE("wos half-plane matches poisson kernel") {
    Domain hp = make_half_plane_window(32.0);
    BoundaryRegion seg = BoundaryRegion::of_pieces({0}, Ball{{0.0, 0.0}, 1.0});
    MeasureEstimate e = wos_measure(hp, {0.0, 1.0}, seg, 1e-4, 40000, 11);
    CHECK(std::abs(e.value - 0.5) <= 3.0 * e.stderr_ + 2e-3);
}

TEST_CASE("wos precondition errors") {
    Domain disc = make_disc(1.0);
    CHECK_THROWS_AS(
        wos_measure(disc, {2.0, 0.0}, BoundaryRegion::whole_boundary(disc), 1e-4, 100, 1),
        PreconditionError);
    CHECK_THROWS_AS(
        wos_measure(disc, {0.9, 0.0}, BoundaryRegion::whole_boundary(disc), 0.5, 100, 1),
        PreconditionError);
}

TEST_CASE("wos additivity from a shared path set") {
    Domain disc = make_disc(1.0, {0.0, 1.0, 2.0});
    Vec2 p{0.1, 0.2};
    auto terms = wos_terminals(disc, p, 1e-4, 5000, 5);
    BoundaryRegion e1 = BoundaryRegion::by_label_prefix(disc, "arc0");
    BoundaryRegion e2 = BoundaryRegion::by_label_prefix(disc, "arc1");
    BoundaryRegion e12 = BoundaryRegion::of_pieces({e1.piece_ids[0], e2.piece_ids[0]});
    auto frac = [&](const BoundaryRegion& r) {
        std::int64_t c = 0;
        for (const Terminal& t : terms)
            if (!t.capped && r.contains(disc, t.piece, t.point)) ++c;
        return static_cast<double>(c) / static_cast<double>(terms.size());
    };
    CHECK(frac(e12) == frac(e1) + frac(e2));
}

TEST_CASE("ball-restricted estimator: empty and sphere-dominated cases") {
    Domain disc = make_disc(2.0);
    Ball cap{{0.0, 0.0}, 1.0};
    MeasureEstimate e = wos_measure_in_ball(disc, cap, {0.0, 0.0},
                                            BoundaryRegion::whole_boundary(disc), 1e-4, 2000, 3);
    CHECK(e.value == 0.0);  // sphere absorbs everything before the disc boundary
}

TEST_CASE("ball-restricted half-plane below unrestricted, matches FD oracle") {
    Domain hp = make_half_plane_window(32.0);
    Ball cap{{0.0, 0.0}, 2.0};
    BoundaryRegion seg = BoundaryRegion::of_pieces({0}, Ball{{0.0, 0.0}, 1.0});
    MeasureEstimate e = wos_measure_in_ball(hp, cap, {0.0, 1.0}, seg, 1e-4, 40000, 13);
    CHECK(e.value < 0.5);
    double fd = oracles::fd_halfdisc_measure(2.0, -1.0, 1.0, {0.0, 1.0});
    CHECK(std::abs(e.value - fd) <= 3.0 * e.stderr_ + 0.02);  // FD truncation ~ O(h)
}

TEST_CASE("shell refinement stability on the disc") {
    Domain disc = make_disc(1.0, {0.0, kPi / 2});
    BoundaryRegion arc = BoundaryRegion::by_label_prefix(disc, "arc0");
    MeasureEstimate a = wos_measure(disc, {0.3, -0.2}, arc, 1e-4, 20000, 21);
    MeasureEstimate b = wos_measure(disc, {0.3, -0.2}, arc, 5e-5, 20000, 22);
    CHECK(std::abs(a.value - b.value) <= 3.0 * (a.stderr_ + b.stderr_));
}

TEST_CASE("maximum principle analogue: sphere mass decreases under radius doubling") {
    Domain dom = make_cantor({0.25, 3}, 4.0);
    Vec2 x{0.0, 0.0};
    Vec2 p{-0.02, -0.02};
    REQUIRE(dom.contains(p));
    double prev = 1.0;
    for (double r : {0.1, 0.2, 0.4}) {
        Ball cap{x, 2.0 * r};
        auto terms = wos_terminals_in_ball(dom, cap, p, 1e-5, 8000, 31);
        std::int64_t sphere = 0;
        for (const Terminal& t : terms)
            if (t.piece == kSpherePiece) ++sphere;
        double frac = static_cast<double>(sphere) / static_cast<double>(terms.size());
        CHECK(frac <= prev + 0.02);
        prev = frac;
    }
}

TEST_CASE("harnack consistency inside a common ball") {
    Domain disc = make_disc(1.0, {0.0, kPi / 2});
    BoundaryRegion arc = BoundaryRegion::by_label_prefix(disc, "arc0");
    MeasureEstimate ep = wos_measure(disc, {0.1, 0.0}, arc, 1e-4, 20000, 41);
    MeasureEstimate eq = wos_measure(disc, {-0.1, 0.0}, arc, 1e-4, 20000, 42);
    // Harnack on B(0, 1/2): u(p) <= 3 u(q) for p, q in B(0, 1/4)-ish
    CHECK(ep.value <= 3.0 * eq.value + 3.0 * (ep.stderr_ + eq.stderr_));
    CHECK(eq.value <= 3.0 * ep.value + 3.0 * (ep.stderr_ + eq.stderr_));
}

TEST_CASE("equilibrium measure: circle and segment capacities") {
    Domain circ = make_custom({make_circle({0.0, 0.0}, 0.75, "c")}, {{0.0, 0.0}, 4.0}, {});
    EquilibriumData eq = equilibrium_measure(circ, BoundaryRegion::core_boundary(circ), 2000);
    CHECK(std::abs(eq.capacity - 0.75) / 0.75 < 0.02);
    CHECK(eq.residual <= 1e-8 * std::abs(eq.robin));
    for (double w : eq.weights) CHECK(w >= 0.0);
    double sum = 0.0;
    for (double w : eq.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

    // segment of length 4 has capacity L/4 = 1
    Domain seg = make_custom({make_segment({-2.0, 0.0}, {2.0, 0.0}, "s")}, {{0.0, 0.0}, 8.0}, {});
    EquilibriumData eqs = equilibrium_measure(seg, BoundaryRegion::core_boundary(seg), 2000);
    CHECK(std::abs(eqs.capacity - 1.0) < 0.02);
}

TEST_CASE("capacity monotone under set growth") {
    Domain two = make_custom({make_segment({0.0, 0.0}, {0.5, 0.0}, "a"),
                              make_segment({3.0, 0.0}, {3.5, 0.0}, "b")},
                             {{1.75, 0.0}, 8.0}, {});
    Domain merged = make_custom({make_segment({0.0, 0.0}, {3.5, 0.0}, "ab")},
                                {{1.75, 0.0}, 8.0}, {});
    EquilibriumData e2 = equilibrium_measure(two, BoundaryRegion::core_boundary(two), 600);
    EquilibriumData em =
        equilibrium_measure(merged, BoundaryRegion::core_boundary(merged), 600);
    CHECK(em.capacity > e2.capacity);
}

TEST_CASE("equilibrium errors") {
    Domain dot = make_custom({make_dot({0.0, 0.0}, "p")}, {{0.0, 0.0}, 4.0}, {});
    CHECK_THROWS_AS(equilibrium_measure(dot, BoundaryRegion::core_boundary(dot), 16),
                    SolverError);
    Domain seg = make_custom({make_segment({0.0, 0.0}, {1.0, 0.0}, "s")}, {{0.0, 0.0}, 4.0}, {});
    CHECK_THROWS_AS(equilibrium_measure(seg, BoundaryRegion::core_boundary(seg), 4),
                    PreconditionError);
}

TEST_CASE("riesz potential: point mass, gradient, sphere mean value") {
    // single node, weight 1, d=2: value = 1/|p-y|
    std::vector<std::pair<PointN, double>> one{{{0.0, 0.0, 0.0}, 1.0}};
    PointN p{3.0, 0.0, 4.0};
    RieszResult r = riesz_potential(one, p, 2);
    CHECK(r.value == doctest::Approx(1.0 / 5.0).epsilon(1e-14));

    // gradient vs central differences
    std::vector<std::pair<PointN, double>> mu{{{0.1, 0.2, -0.3}, 0.7}, {{-0.5, 0.4, 0.2}, 0.3}};
    PointN q{1.0, -0.7, 0.5};
    RieszResult rq = riesz_potential(mu, q, 2);
    double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
        PointN qp = q, qm = q;
        qp[static_cast<std::size_t>(k)] += h;
        qm[static_cast<std::size_t>(k)] -= h;
        double fd = (riesz_potential(mu, qp, 2).value - riesz_potential(mu, qm, 2).value) /
                    (2.0 * h);
        CHECK(std::abs(fd - rq.gradient[static_cast<std::size_t>(k)]) <=
              1e-6 * std::abs(fd) + 1e-12);
    }

    // Newton's theorem: uniform mass on a sphere acts like a point mass outside
    auto nodes = oracles::sphere_nodes(4000, 0.8);
    std::vector<std::pair<PointN, double>> sphere;
    for (auto& n : nodes) sphere.push_back({n, 1.0 / 4000.0});
    PointN far{0.0, 0.0, 2.5};
    RieszResult rs = riesz_potential(sphere, far, 2);
    CHECK(rs.value == doctest::Approx(1.0 / 2.5).epsilon(1e-3));

    CHECK_THROWS_AS(riesz_potential(one, PointN{0.0, 0.0, 0.0}, 2), SolverError);
    CHECK_THROWS_AS(riesz_potential(one, p, 1), PreconditionError);
}

TEST_CASE("test function on a cantor cube region") {
    Domain dom = make_cantor({0.2, 3}, 4.0);
    // region: the whole first top square's boundary, ball at its corner
    BoundaryRegion region = BoundaryRegion::by_label_prefix(dom, "r.0");
    Vec2 x{0.0, 0.0};
    double r = 0.3;
    // shallow interior ball hugging the boundary near x (the construction
    // wants dist(p, boundary) small next to one wall of a gap)
    Ball bs;
    for (double t = 0.004; t < 0.1; t *= 1.12) {
        Vec2 p{t, t * 1.03};
        if (!dom.contains(p)) continue;
        double sd = dom.distance(p);
        if (sd >= 0.003 && sd <= 0.008) {
            bs = {p, sd / 4.0};
            break;
        }
    }
    REQUIRE(bs.radius > 0.0);
    TestFunctionBudget budget;
    budget.samples = 40000;
    budget.seed = 17;
    TestFunction tf = build_test_function(dom, x, r, bs, region, 0.2, budget);
    CHECK(tf.c9 > 0.0);
    CHECK(tf.c10 > 0.0);
    // f range on boundary points of the support
    for (int pi : tf.support.piece_ids) {
        const Piece& pc = dom.pieces[static_cast<std::size_t>(pi)];
        for (double t : {0.1, 0.5, 0.9}) {
            double f = tf.f_value(dom, pi, pc.point_at(t * pc.length()));
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
        }
    }
    // u in [0,1] at interior samples
    auto [u1, se1] = tf.u_value(dom, {-0.5, -0.5}, budget);
    CHECK(u1 >= 0.0);
    CHECK(u1 <= 1.0);
    (void)se1;
}
