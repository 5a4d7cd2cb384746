#include <doctest.h>

#include <cmath>

#include "hmlab/cubes.hpp"
#include "hmlab/errors.hpp"
#include "hmlab/geometry.hpp"

using namespace hmlab;

namespace {
Domain segment_domain() {
    return make_custom({make_segment({0.0, 0.0}, {1.0, 0.0}, "seg")}, {{0.5, 0.0}, 4.0}, {});
}
} // namespace

TEST_CASE("build_nets on a segment") {
    Domain dom = segment_domain();
    BoundarySampleSet samples = sample_boundary(dom, std::ldexp(1.0, -2 * 1) / 8.0 / 8.0);
    std::vector<Net> nets = build_nets(samples, 2, 1, 0.25);
    // j=0: separation 1 >= sample diameter -> single net point
    CHECK(nets[0].sample.size() == 1);
    // j=1: separation 1/4 -> 4 or 5 points
    CHECK(nets[1].sample.size() >= 4);
    CHECK(nets[1].sample.size() <= 5);
    for (std::size_t i = 0; i < nets[1].sample.size(); ++i)
        for (std::size_t k = i + 1; k < nets[1].sample.size(); ++k) {
            double d = dist(samples.pos[static_cast<std::size_t>(nets[1].sample[i])],
                            samples.pos[static_cast<std::size_t>(nets[1].sample[k])]);
            CHECK(d >= 0.25);
        }
    // maximality: every sample within separation of some net point
    for (int u = 0; u < samples.size(); ++u) {
        double best = 1e300;
        for (int s : nets[1].sample)
            best = std::min(best, dist(samples.pos[static_cast<std::size_t>(u)],
                                       samples.pos[static_cast<std::size_t>(s)]));
        CHECK(best < 0.25);
    }
}

TEST_CASE("build_nets resolution guard") {
    Domain dom = segment_domain();
    BoundarySampleSet coarse = sample_boundary(dom, 0.01);
    CHECK_THROWS_AS(build_nets(coarse, 4, 4, 0.25), ResolutionError);
}

TEST_CASE("choose_radius on a line boundary has small covering count") {
    Domain dom = segment_domain();
    BoundarySampleSet samples = sample_boundary(dom, 1e-4);
    RadiusChoice rc = choose_radius(samples, {0.5, 0.0}, 1, 2, 0.25);
    CHECK(rc.radius > 0.25);
    CHECK(rc.radius < 0.25 * 1.25);
    CHECK(rc.m >= 1);
    CHECK(rc.m <= 6);
    // boundary empty inside the annulus: a far point
    RadiusChoice rc2 = choose_radius(samples, {0.5, 3.0}, 1, 2, 0.25);
    CHECK(rc2.m == 0);
}

TEST_CASE("segment cube family: partitions, nesting, sizes") {
    Domain dom = segment_domain();
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2);
    FamilyAudit audit = audit_family(fam);
    INFO(audit.first_failure);
    CHECK(audit.partition_ok);
    CHECK(audit.nesting_ok);
    CHECK(audit.diam_ok);
    CHECK(audit.anchor_ok);
    // level-1 cubes are intervals with length within [2^-4/3, 4(1+eta)2^-4]
    for (const Cube& c : fam.levels[1]) {
        CHECK(c.diam >= c.scale / 3.0);
        CHECK(c.diam <= 4.0 * 1.25 * c.scale);
    }
    HausdorffAudit haus = audit_hausdorff(fam);
    CHECK(haus.violations == 0);
}

TEST_CASE("cantor cube family small case: full audit") {
    Domain dom = make_cantor({0.2, 3}, 4.0);
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2);
    FamilyAudit audit = audit_family(fam);
    INFO(audit.first_failure);
    CHECK(audit.partition_ok);
    CHECK(audit.nesting_ok);
    CHECK(audit.diam_ok);
    CHECK(audit.anchor_ok);
    HausdorffAudit haus = audit_hausdorff(fam);
    INFO(haus.first_failure);
    CHECK(haus.violations == 0);
    CHECK(haus.worst_ratio <= 1.0);

    // determinism: rebuild gives the identical family
    CubeFamily fam2 = build_cubes(dom, 4, 0.25, 2, 2);
    REQUIRE(fam2.levels.size() == fam.levels.size());
    for (std::size_t j = 0; j < fam.levels.size(); ++j) {
        REQUIRE(fam2.levels[j].size() == fam.levels[j].size());
        for (std::size_t i = 0; i < fam.levels[j].size(); ++i) {
            CHECK(fam2.levels[j][i].lo == fam.levels[j][i].lo);
            CHECK(fam2.levels[j][i].hi == fam.levels[j][i].hi);
            CHECK(fam2.levels[j][i].anchor == fam.levels[j][i].anchor);
        }
    }
}

TEST_CASE("(5.11) parameter gate") {
    Domain dom = segment_domain();
    CHECK_THROWS_AS(build_cubes(dom, 2, 0.5, 1, 1), ParameterError);  // eta^2 = 1/4 > 1/9
    CHECK_THROWS_AS(build_cubes(dom, 8, 0.25, 1, 1), ParameterError); // 2^-8 != eta^2 scale
}

TEST_CASE("small boundary stats") {
    Domain dom = segment_domain();
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2);
    // a middle interval cube: collar concentrates at 2 endpoints
    REQUIRE(fam.levels[1].size() >= 3);
    const Cube& mid = fam.levels[1][1];
    std::vector<double> taus{1.0 / 16, 1.0 / 256};
    auto stats = small_boundary_stats(fam, mid, taus);
    for (const auto& st : stats) {
        CHECK(st.n_tau >= 0);
        CHECK(st.n_tau <= 8);
    }
    double fit = small_boundary_fit(stats, 1);
    CHECK(std::isfinite(fit));

    // the whole-boundary cube at level 0 has empty collar
    auto stats0 = small_boundary_stats(fam, fam.levels[0][0], taus);
    for (const auto& st : stats0) CHECK(st.n_tau == 0);
}

TEST_CASE("attach corkscrew balls on half-plane family with certification") {
    static Domain dom = make_half_plane_window(32.0);
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2, 1.0 / 2048);
    BallAttachOptions opt;
    opt.eps = 0.35;  // attainable in the paper c3-range at N = 4
    opt.samples = 4000;
    opt.seed = 3;
    opt.certify_per_level = 6;
    attach_corkscrew_balls(fam, opt);
    CHECK(fam.c3 > std::ldexp(1.0, -5) * fam.c0);
    CHECK(fam.c3 < fam.c0 / 4.0);
    for (const auto& level : fam.levels)
        for (const Cube& c : level) {
            CHECK(c.ball.radius == fam.c3 * c.scale);
            CHECK(dom.distance(c.ball.center) >= 4.0 * c.ball.radius * (1.0 - 1e-9));
            CHECK(dist(c.ball.center, c.anchor) + 4.0 * c.ball.radius <=
                  0.5 * fam.c0 * c.scale * (1.0 + 1e-9));
        }
    // certified subset got measured values
    int certified = 0;
    for (const auto& level : fam.levels)
        for (const Cube& c : level)
            if (c.ball_certified) {
                ++certified;
                CHECK(c.ball_measure >= 1.0 - opt.eps);
            }
    CHECK(certified > 0);
}

TEST_CASE("deep-ball mode certifies (1.18) at small eps") {
    static Domain dom = make_half_plane_window(32.0);
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2, 1.0 / 2048);
    BallAttachOptions opt;
    opt.eps = 0.1;
    opt.samples = 10000;
    opt.seed = 4;
    opt.certify_per_level = 4;
    opt.deep_balls = true;
    attach_corkscrew_balls(fam, opt);
    int certified = 0;
    for (const auto& level : fam.levels)
        for (const Cube& c : level)
            if (c.ball_certified) {
                ++certified;
                CHECK(c.ball_measure >= 1.0 - opt.eps);
            }
    CHECK(certified > 0);
    // the eps-depth tradeoff at fixed N: the deep balls leave the paper range
    CHECK(fam.c3 <= std::ldexp(1.0, -5) * fam.c0);
    CHECK(fam.range_violations_1_16 > 0);
}

TEST_CASE("dilated runs contain the cube range and grow with radius") {
    Domain dom = make_cantor({0.2, 3}, 4.0);
    CubeFamily fam = build_cubes(dom, 4, 0.25, 2, 2);
    const Cube& c = fam.levels[1][0];
    auto& runs1 = fam.dilated_runs(c, 0.5 * c.scale);
    auto& runs2 = fam.dilated_runs(c, c.scale);
    auto total = [](const std::vector<std::pair<int, int>>& runs) {
        int t = 0;
        for (auto [lo, hi] : runs) t += hi - lo;
        return t;
    };
    CHECK(total(runs1) >= c.hi - c.lo);
    CHECK(total(runs2) >= total(runs1));
    // exactness: a sample just outside the radius is excluded
    for (auto [lo, hi] : runs2)
        for (int pos = lo; pos < hi; ++pos) {
            if (pos >= c.lo && pos < c.hi) continue;
            Vec2 p = fam.samples.pos[static_cast<std::size_t>(
                fam.tree_order[static_cast<std::size_t>(pos)])];
            double dmin = 1e300;
            for (int q = c.lo; q < c.hi; ++q)
                dmin = std::min(dmin, dist(p, fam.samples.pos[static_cast<std::size_t>(
                                                  fam.tree_order[static_cast<std::size_t>(q)])]));
            REQUIRE(dmin <= c.scale * (1.0 + 1e-12));
        }
}
