#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hmlab/geometry.hpp"
#include "hmlab/potential.hpp"
#include "hmlab/whitney.hpp"

namespace hmlab {

// A bounded harmonic function that can be evaluated (with noise, for Monte
// Carlo-backed handles) at interior points.
struct HarmonicFunctionHandle {
    enum class Kind { Analytic, WosRegion, TestFn };
    Kind kind = Kind::Analytic;
    double sup_norm = 1.0;

    // Analytic
    std::function<double(Vec2)> f;
    std::function<Vec2(Vec2)> exact_grad;  // may be empty

    // WosRegion: u(p) = omega(p, region, Omega)
    const Domain* dom = nullptr;
    BoundaryRegion region;
    std::int64_t budget = 20000;
    double shell = 1e-4;
    std::uint64_t seed = 1;

    // TestFn
    const TestFunction* test_fn = nullptr;

    std::pair<double, double> value(Vec2 p) const;  // (value, stderr)

    static HarmonicFunctionHandle analytic(std::function<double(Vec2)> f,
                                           std::function<Vec2(Vec2)> grad, double sup);
    static HarmonicFunctionHandle halfplane_angle();
    static HarmonicFunctionHandle wos_region(const Domain& dom, BoundaryRegion region,
                                             std::int64_t budget, double shell,
                                             std::uint64_t seed);
};

struct GradEstimate {
    Vec2 grad;
    Vec2 stderr_;
};

// Central differences per coordinate; Monte Carlo-backed handles use
// common-random-number paired estimates.
GradEstimate grad_estimate(const HarmonicFunctionHandle& u, Vec2 p, double step);

struct CarlesonReport {
    Vec2 center;
    double radius = 0.0;
    double value = 0.0;             // r^{-d} sum |grad u|^2 dist * vol(Q cap B)
    double truncation_bound = 0.0;  // Harnack budget for sub-min-side cells
    std::int64_t quadrature_cells = 0;
    double noise_bias_subtracted = 0.0;
};

// Square-function functional over Whitney cells meeting B(x, r), one
// gradient evaluation per cell at its center, cell volumes clipped to the
// ball. Throws on cells whose gradient noise cannot be brought under 10% of
// the Harnack bound by budget doubling.
CarlesonReport carleson_functional(const Domain& dom, const HarmonicFunctionHandle& u,
                                   Vec2 x, double r, double min_side);

// Exact area of box cap disc (planar).
double box_disc_area(const Box2& box, Vec2 center, double radius);

struct DistIntegralReport {
    double value = 0.0;  // finest-refinement integral / R
    std::vector<double> refine_values;  // integral / R at min_side, /2, /4
    bool saturated = false;             // last increment < 2% of value
    double skipped_volume = 0.0;        // unresolved shell at the finest pass
    std::int64_t cells = 0;
};

// Integral of 1/dist(y, K) over B(x,R) minus K on a Whitney-graded adaptive
// grid, refined three times for the saturation diagnostic. K is the core
// (non-window) boundary with its solid interior.
DistIntegralReport dist_integral(const Domain& dom, Vec2 x, double R,
                                 std::int64_t quad_cells, double min_side);

struct EpsApproximant {
    struct Cell {
        DyadicCube cube;
        double value = 0.0;
    };
    std::vector<Cell> cells;
    bool success = false;
    double bv_ratio = 0.0;       // r^{-d} total face-jump variation in the region
    double eps = 0.0;
    std::int64_t subdivided = 0;
    std::int64_t failed_cells = 0;  // oscillation still >= eps at min-side
    double remainder_face_length = 0.0;

    // piecewise value at p (nearest cell by containment); nan outside
    double eval(Vec2 p) const;
};

// Whitney-average approximant: g = u(cell center) per cell, cells subdivided
// until the sampled oscillation is below eps/2. The (1.3) ratio uses the
// exact face-jump total variation of the piecewise function (the TV of any
// mollification is bounded by it).
EpsApproximant eps_approximant(const Domain& dom, const HarmonicFunctionHandle& u,
                               double eps, const Ball& region, double min_side);

} // namespace hmlab
