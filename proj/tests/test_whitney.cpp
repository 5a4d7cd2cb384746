#include <doctest.h>

#include <cmath>

#include "hmlab/geometry.hpp"
#include "hmlab/whitney.hpp"

using namespace hmlab;

TEST_CASE("half-plane: [0,1]x[1,2] is a maximal Whitney cube") {
    Domain hp = make_half_plane_window(64.0);
    WhitneyDecomposition dec = whitney_decompose(hp, {{0.0, 1.0}, 2.0}, 1.0 / 64);
    bool found = false;
    for (const WhitneyCell& c : dec.cells)
        if (c.cube.level == 0 && c.cube.kx == 0 && c.cube.ky == 1) found = true;
    CHECK(found);
    // its c6-dilate misses y=0 while the parent's meets it
    DyadicCube q{0, 0, 1, 1.0};
    CHECK(!dilate_meets_boundary(q, 17.0 / 16.0, hp));
    CHECK(dilate_meets_boundary(q.parent(), 17.0 / 16.0, hp));
}

TEST_CASE("punctured plane: cell size proportional to distance") {
    Domain dot = make_custom({make_dot({0.0, 0.0}, "origin")}, {{0.0, 0.0}, 16.0}, {});
    WhitneyDecomposition dec = whitney_decompose(dot, {{0.0, 0.0}, 2.0}, 1.0 / 32);
    std::string fail;
    CHECK(check_whitney_properties(dec, dot, &fail));
    INFO(fail);
    CHECK(check_disjointness(dec));
    for (const WhitneyCell& c : dec.cells) {
        if (c.dist_to_boundary < 1.0 / 16) continue;  // near truncation scale
        double ratio = c.dist_to_boundary / c.cube.side();
        CHECK(ratio > 0.5);
        CHECK(ratio < 8.0);
    }
}

TEST_CASE("region disjoint from domain gives empty list") {
    Domain hp = make_half_plane_window(8.0);
    WhitneyDecomposition dec = whitney_decompose(hp, {{0.0, -5.0}, 1.0}, 1.0 / 16);
    CHECK(dec.cells.empty());
}

TEST_CASE("classification: same boundary is all Case I, carved disc flips") {
    Domain hp = make_half_plane_window(16.0);
    WhitneyDecomposition dec = whitney_decompose(hp, {{0.0, 1.0}, 1.5}, 1.0 / 32);
    classify_all(dec, hp);
    for (const WhitneyCell& c : dec.cells) CHECK(c.label == CellCase::I);

    // carve a disc centered in one known cell
    DyadicCube target;
    bool found = false;
    for (const WhitneyCell& c : dec.cells)
        if (c.cube.side() >= 0.25 && !found) {
            target = c.cube;
            found = true;
        }
    REQUIRE(found);
    Vec2 ctr = target.box().center();
    std::vector<Piece> pieces = hp.pieces;
    pieces.push_back(make_circle(ctr, target.side() / 4.0, "hole"));
    Domain carved = make_custom(std::move(pieces), hp.window, hp.params);
    WhitneyDecomposition dec2 = dec;
    classify_all(dec2, carved);
    bool flipped = false;
    for (const WhitneyCell& c : dec2.cells)
        if (c.cube == target) flipped = c.label == CellCase::II;
    CHECK(flipped);
}

TEST_CASE("whitney properties on a small cantor domain") {
    Domain dom = make_cantor({0.25, 2}, 4.0);
    WhitneyDecomposition dec = whitney_decompose(dom, {{0.5, 0.5}, 1.5}, 1.0 / 256);
    REQUIRE(!dec.cells.empty());
    std::string fail;
    CHECK(check_whitney_properties(dec, dom, &fail));
    INFO(fail);
    CHECK(check_disjointness(dec));
    int overlap = measured_overlap(dec);
    CHECK(overlap >= 1);
    CHECK(overlap <= 12);
    CHECK(dec.remainder_volume > 0.0);  // fractal boundary always truncates
}

TEST_CASE("case II mass ratio is reported and finite") {
    Domain dom = make_cantor({0.25, 2}, 4.0);
    WhitneyDecomposition dec = whitney_decompose(dom, {{0.5, 0.5}, 1.0}, 1.0 / 128);
    // against a subdomain boundary: carve a tiny disc inside a gap
    std::vector<Piece> pieces = dom.pieces;
    pieces.push_back(make_circle({0.5, 0.5}, 0.05, "hole"));
    Domain carved = make_custom(std::move(pieces), dom.window, dom.params);
    classify_all(dec, carved);
    double ratio = case2_mass_ratio(dec, {{0.5, 0.5}, 1.0}, 1);
    CHECK(ratio > 0.0);
    CHECK(std::isfinite(ratio));
}
