#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmlab/geometry.hpp"
#include "hmlab/rng.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// ---------------------------------------------------------------------------
// Walk-on-spheres
// ---------------------------------------------------------------------------

struct MeasureEstimate {
    double value = 0.0;   // in [0,1]
    double stderr_ = 0.0; // sqrt(v(1-v)/n) for Bernoulli scoring
    std::int64_t samples = 0;
    double shell = 0.0;
    std::uint64_t seed = 0;
    std::int64_t capped_paths = 0;  // hit the max-step cap (fallback bucket)

    std::string to_json() const;
};

struct Terminal {
    int piece = -1;   // attributed boundary piece (-1: step cap hit)
    Vec2 point;       // nearest boundary point at termination
    float arc = 0.0f; // arclength of the attribution point on the piece
    bool capped = false;
};

inline constexpr std::int64_t kMaxWalkSteps = 1'000'000;

// One walk from `start`; jumps to a uniform point of the maximal inscribed
// sphere until the boundary distance drops below `shell`.
Terminal walk_once(const Domain& dom, Vec2 start, double shell, CounterRng& rng);

// Ball-restricted walk: the distance oracle is clipped by the cap ball and
// paths exiting through the sphere are attributed to piece = -2.
inline constexpr int kSpherePiece = -2;
Terminal walk_once_in_ball(const Domain& dom, const Ball& cap, Vec2 start, double shell,
                           CounterRng& rng);

// Batch of terminals with deterministic per-path streams; parallel-safe.
std::vector<Terminal> wos_terminals(const Domain& dom, Vec2 p, double shell,
                                    std::int64_t samples, std::uint64_t seed,
                                    std::uint64_t stream = stream::kWos);
std::vector<Terminal> wos_terminals_in_ball(const Domain& dom, const Ball& cap, Vec2 p,
                                            double shell, std::int64_t samples,
                                            std::uint64_t seed,
                                            std::uint64_t stream = stream::kWosBall);

MeasureEstimate wos_measure(const Domain& dom, Vec2 p, const BoundaryRegion& E, double shell,
                            std::int64_t samples, std::uint64_t seed);
MeasureEstimate wos_measure_in_ball(const Domain& dom, const Ball& cap, Vec2 p,
                                    const BoundaryRegion& E, double shell,
                                    std::int64_t samples, std::uint64_t seed);

// Harmonic measure of [a,b] x {0} at p in the upper half plane (subtended
// angle over pi). Analytic oracle for tests.
double poisson_halfplane(Vec2 p, double a, double b);

// ---------------------------------------------------------------------------
// Logarithmic capacity / equilibrium measure
// ---------------------------------------------------------------------------

struct EquilibriumData {
    std::vector<Vec2> nodes;
    std::vector<double> weights;  // >= 0, sum to 1
    double robin = 0.0;           // gamma
    double capacity = 0.0;        // e^{-gamma}
    double residual = 0.0;        // max-min of the discrete potential over nodes

    // U(p) = sum w_i log(1/|p - y_i|)
    double potential(Vec2 p) const;
    Vec2 potential_gradient(Vec2 p) const;
};

// Midpoint discretization of the region into `nodes` points; solves for the
// unit-mass measure with constant discrete logarithmic potential. Diagonal
// self-energy is -log(local spacing / 2).
EquilibriumData equilibrium_measure(const Domain& dom, const BoundaryRegion& region,
                                    int nodes);
// Same, on an explicit node/spacing list (used for cube sample subsets).
EquilibriumData equilibrium_measure_points(const std::vector<Vec2>& pts,
                                           const std::vector<double>& spacing);

// ---------------------------------------------------------------------------
// Riesz potentials (d >= 2 formulas, unit-tested on point masses)
// ---------------------------------------------------------------------------

struct RieszResult {
    double value = 0.0;
    PointN gradient;
};

// value = sum w_i |p - y_i|^{1-d}; gradient = (1-d) sum w_i (p-y_i)/|p-y_i|^{d+1}
RieszResult riesz_potential(const std::vector<std::pair<PointN, double>>& mu_nodes,
                            const PointN& p, int d);

// ---------------------------------------------------------------------------
// Lemma 3.3-style test functions (planar Case II path)
// ---------------------------------------------------------------------------

struct TestFunctionBudget {
    double shell = 1e-4;
    std::int64_t samples = 20000;
    std::uint64_t seed = 1;
};

// Case II pair built from equilibrium measures on two separated compact
// pieces of the cube. f is supported on E_S with 0 <= f <= 1; u(p) is the
// harmonic extension realized as a walk-on-spheres functional estimator.
struct TestFunction {
    enum class Kind { RieszCaseI, LogCaseII };
    Kind kind = Kind::LogCaseII;
    BoundaryRegion support;       // E_S
    Ball ball;                    // B_S
    Vec2 direction;               // e_S
    double c9 = 0.0;              // certified lower bound for inf_{B_S} u
    double c10 = 0.0;             // certified bound: |grad u . e| >= c10 / radius
    EquilibriumData plus, minus;  // U^+ and U^- data
    double norm = 1.0;            // normalization so f in [0,1]
    std::optional<Ball> clip;     // clip of E_S

    // f at a boundary point of the given piece (0 off the support).
    double f_value(const Domain& dom, int piece, Vec2 point) const;
    // Monte Carlo u(p) with standard error.
    std::pair<double, double> u_value(const Domain& dom, Vec2 p,
                                      const TestFunctionBudget& budget) const;
};

// Build the test function for a boundary ball B(x, r) with interior ball
// `bs` (4*bs inside Omega and bs certified by the (1.18)-style estimate).
// Certifies measured lower bounds c9 (inf over a 5-point stencil of B_S)
// and c10 (directional derivative at the center), each with a 3-sigma
// margin; throws CertificationError when the margin crosses zero.
TestFunction build_test_function(const Domain& dom, Vec2 x, double r, const Ball& bs,
                                 const BoundaryRegion& cube_region, double eps,
                                 const TestFunctionBudget& budget);

} // namespace hmlab
