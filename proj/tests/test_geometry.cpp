#include <doctest.h>

#include <cmath>

#include "hmlab/errors.hpp"
#include "hmlab/geometry.hpp"
#include "hmlab/rng.hpp"

using namespace hmlab;

TEST_CASE("make_cantor structure") {
    Domain d0 = make_cantor({0.25, 0}, 4.0);
    CHECK(d0.pieces.size() == 5);  // 4 sides + window
    CHECK(d0.pieces.back().is_window);

    Domain d1 = make_cantor({0.25, 1}, 4.0);
    CHECK(d1.pieces.size() == 4 * 4 + 1);

    // (lambda=0.3, level=2): 16 squares, 64 side pieces + window
    Domain d2 = make_cantor({0.3, 2}, 4.0);
    CHECK(d2.pieces.size() == 65);
    int sides = 0;
    for (const Piece& p : d2.pieces)
        if (!p.is_window) {
            CHECK(p.length() == doctest::Approx(0.09));
            ++sides;
        }
    CHECK(sides == 64);
}

TEST_CASE("make_cantor parameter errors") {
    CHECK_THROWS_AS(make_cantor({0.6, 1}, 4.0), ParameterError);
    CHECK_THROWS_AS(make_cantor({0.5, 1}, 4.0), ParameterError);
    CHECK_THROWS_AS(make_cantor({0.25, -1}, 4.0), ParameterError);
    CHECK_THROWS_AS(make_cantor({0.25, 1}, 1.0), ParameterError);  // window too small
}

TEST_CASE("signed distance: simple exact values") {
    Domain d0 = make_cantor({0.25, 0}, 4.0);
    CHECK(d0.distance({2.0, 0.5}) == 1.0);          // unit square right side
    CHECK(d0.distance({1.0, 0.5}) == 0.0);          // on the boundary
    Domain d1 = make_cantor({0.25, 1}, 4.0);
    CHECK(d1.distance({0.5, 0.5}) == doctest::Approx(std::sqrt(2.0) * 0.25).epsilon(1e-15));
}

TEST_CASE("hierarchical distance is bit-identical to brute force") {
    for (double lam : {0.2, 0.25, 0.3}) {
        Domain dom = make_cantor({lam, 4}, 4.0);
        CounterRng rng(7, 99);
        for (int i = 0; i < 10000; ++i) {
            Vec2 p{rng.uniform(-3.0, 3.5), rng.uniform(-3.0, 3.5)};
            double a = dom.distance(p);
            double b = dom.distance_bruteforce(p);
            REQUIRE(a == b);  // exact equality, same arithmetic
        }
    }
}

TEST_CASE("nearest agrees with brute force argmin") {
    Domain dom = make_cantor({0.2, 3}, 4.0);
    CounterRng rng(11, 5);
    for (int i = 0; i < 2000; ++i) {
        Vec2 p{rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 2.0)};
        NearestHit h = dom.nearest(p);
        REQUIRE(h.dist == dom.distance_bruteforce(p));
        REQUIRE(dom.pieces[static_cast<std::size_t>(h.piece)].distance(p) == h.dist);
    }
}

TEST_CASE("cantor nesting: every level square lies in its parent") {
    // verified through membership: points of level-(n+1) squares are in K_n
    Domain deep = make_cantor({0.3, 3}, 4.0);
    Domain shallow = make_cantor({0.3, 2}, 4.0);
    CounterRng rng(3, 1);
    for (int i = 0; i < 3000; ++i) {
        Vec2 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        if (!deep.contains(p))  // p in K_3
            CHECK(!shallow.contains(p));  // then p in K_2
    }
}

TEST_CASE("contains matches distance sign on the window") {
    Domain dom = make_cantor({0.25, 2}, 4.0);
    CHECK(dom.contains({-1.0, -1.0}));
    CHECK(!dom.contains({0.01, 0.01}));   // inside corner square
    CHECK(dom.contains({0.5, 0.5}));      // central gap
    CHECK(!dom.contains({10.0, 0.0}));    // outside window
}

TEST_CASE("grid_cover_count") {
    Domain dom = make_custom({make_segment({0.0, 0.0}, {1.0, 0.0}, "seg")},
                             {{0.0, 0.0}, 4.0}, {});
    BoundaryRegion all = BoundaryRegion::core_boundary(dom);
    // aligned segment of length 1, tau = 1/4: endpoint 1.0 falls in cell 4
    CHECK(grid_cover_count(dom, all, 0.25) == 5);
    // length 0.9 segment: ceil(0.9/0.25) = 4 cells
    Domain dom2 = make_custom({make_segment({0.0, 0.0}, {0.9, 0.0}, "seg")},
                              {{0.0, 0.0}, 4.0}, {});
    CHECK(grid_cover_count(dom2, BoundaryRegion::core_boundary(dom2), 0.25) == 4);
    // empty region
    CHECK(grid_cover_count(dom, BoundaryRegion::of_pieces({}), 0.25) == 0);
    // unit square boundary, tau = 1/4 -> 16 cells
    Domain sq = make_cantor({0.25, 0}, 4.0);
    BoundaryRegion sides = BoundaryRegion::core_boundary(sq);
    CHECK(grid_cover_count(sq, sides, 0.25) == 16);
}

TEST_CASE("grid_cover_count monotone under tau halving") {
    Domain dom = make_cantor({0.3, 2}, 4.0);
    BoundaryRegion all = BoundaryRegion::core_boundary(dom);
    double tau = 0.25;
    std::int64_t prev = grid_cover_count(dom, all, tau);
    for (int k = 0; k < 3; ++k) {
        tau *= 0.5;
        std::int64_t next = grid_cover_count(dom, all, tau);
        CHECK(next >= prev);      // finer grid never counts fewer
        CHECK(next <= 4 * prev);  // at most the trivial 2^{d+1} multiplicity
        prev = next;
    }
}

TEST_CASE("corkscrew witness: half-plane analytic") {
    Domain hp = make_half_plane_window(8.0);
    Ball b = corkscrew_witness(hp, {0.0, 0.0}, 1.0);
    CHECK(b.center.x == 0.0);
    CHECK(b.center.y == 0.5);
    CHECK(b.radius == 0.5);
    CHECK_THROWS_AS(corkscrew_witness(hp, {0.0, 0.0}, 100.0), PreconditionError);
}

TEST_CASE("corkscrew witness: cantor certified") {
    Domain dom = make_cantor({0.25, 3}, 4.0);
    Ball b = corkscrew_witness(dom, {0.0, 0.0}, 1.0);
    CHECK(dom.distance(b.center) >= b.radius);
    CHECK(dist(b.center, {0.0, 0.0}) + b.radius <= 1.0 + 1e-12);
    CHECK(b.radius >= dom.params.alpha * 1.0);
}

TEST_CASE("piece-box intersection predicates") {
    Piece seg = make_segment({0.0, 0.0}, {1.0, 1.0}, "s");
    CHECK(seg.intersects_box({{0.4, 0.4}, {0.6, 0.6}}));
    CHECK(!seg.intersects_box({{0.8, 0.0}, {0.9, 0.1}}));
    Piece circ = make_circle({0.0, 0.0}, 1.0, "c");
    CHECK(circ.intersects_box({{0.9, -0.1}, {1.1, 0.1}}));
    CHECK(!circ.intersects_box({{-0.5, -0.5}, {0.5, 0.5}}));  // box inside circle
    Piece arc = make_arc({0.0, 0.0}, 1.0, 0.0, 1.5707963267948966, "a");
    CHECK(arc.intersects_box({{0.9, -0.1}, {1.1, 0.1}}));
    CHECK(!arc.intersects_box({{-1.1, -0.1}, {-0.9, 0.1}}));  // angle outside range
}

TEST_CASE("domain spec JSON round trip") {
    Domain dom = make_cantor({0.2, 3}, 4.0);
    std::string js = domain_spec_to_json(dom);
    Domain back = domain_from_spec_json(js);
    CHECK(back.cantor->lambda == dom.cantor->lambda);
    CHECK(back.cantor->level == dom.cantor->level);
    CHECK(back.pieces.size() == dom.pieces.size());
}
