#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmlab/corona.hpp"
#include "hmlab/cubes.hpp"

namespace hmlab {

// Spherical caps (planar: arcs) on the hosting circle of radius
// 1.5 c3 ell(S) around p_S, strictly inside 2B_S minus B_S.
struct CapSet {
    CubeId host;
    Ball sphere;  // hosting circle
    std::vector<std::pair<double, double>> caps;  // (center angle, angular radius)
    double area = 0.0;                            // total arc length = c18 ell^d

    std::vector<Piece> to_pieces(int capset_ordinal) const;
};

// Places cap_count congruent separated arcs with total length c18 ell(S)^d.
CapSet place_caps(const CubeFamily& fam, const Cube& s, double c18, int cap_count);

// sigma = mu + nu: mu lives as point masses on boundary samples, nu as
// uniform length measure on the cap arcs.
struct SigmaMeasure {
    int depth = 0;
    std::vector<double> sample_mass;  // per sample index (mu)
    std::vector<CapSet> caps;         // nu pieces in placement order
    double mu_mass = 0.0;
    double nu_mass = 0.0;

    double total() const { return mu_mass + nu_mass; }
    // sigma(B(c, r)); exact arc clipping for nu, sample membership for mu
    double ball_mass(const CubeFamily& fam, Vec2 c, double r) const;
    // sigma restricted to one generation's pieces intersected with a cube
    // range, used by the (7.7) audit
};

struct AugmentParams {
    double A = 8.0;
    double delta = 0.03;
    double eps = 0.1;
    std::int64_t budget = 20000;
    std::int64_t cap_budget = 4000;  // walks per (7.2)/(7.3) gate check
    double shell = 1e-4;
    std::uint64_t seed = 1;
    int max_doublings = 2;
    int scan_depth = 2;
    int depth = 2;               // tilde generations
    double c18 = -1.0;           // < 0: calibrate by bisection against (7.2)
    int cap_count = 4;
    double lambda_dilate = -1.0; // < 0: 1 + c3/2
    double gate_lo = 0.35, gate_hi = 0.65;
};

struct TildeStop {
    CubeId id;
    StopKind kind = StopKind::None;
    double measured = 0.0;
    double cap_measure = -1.0;   // (7.2) gate value, -1 before placement
    double closure_measure = 0.0;  // (7.3) value
    int capset = -1;             // ordinal into sigma.caps
};

struct SigmaAudit {
    int cubes = 0;
    int pass = 0;   // within [c17 ell^d, (c18+1) ell^d] with 3-sigma slack
    double min_ratio = 1e300;  // sigma(S^{n+1}) / ell^d
    double max_ratio = 0.0;
};

struct AugmentResult {
    Domain augmented;  // base domain plus absorbing cap pieces
    SigmaMeasure sigma;
    double c18 = 0.0;
    double lambda_dilate = 0.0;
    std::vector<std::vector<TildeStop>> generations;
    std::vector<double> packing_partial;  // (7.10) partial sums, worst root
    int processed = 0;      // cubes with placed caps
    int gate_pass = 0;      // (7.2) in [gate_lo, gate_hi]
    int closure_pass = 0;   // (7.3) > 1 - eps - 3 sigma
    double undecided_leaf_mass = 0.0;
    SigmaAudit sigma_audit;  // (7.7)

    std::string to_json() const;
};

// Section-7 construction: iterated tilde-HD/LD stopping with point
// thresholds at p_S, caps added to the walk oracle per generation, and the
// sigma measure assembled from the same walk sets.
AugmentResult build_augmented(const CubeFamily& fam, const AugmentParams& params);

struct AhlforsReport {
    int trials = 0;
    double min_ratio = 1e300;
    double max_ratio = 0.0;
    double constant = 0.0;  // max(max_ratio, 1/min_ratio)
    double r_min = 0.0, r_max = 0.0;

    std::string to_json() const;
};

// sigma(B(x,r))/r^d over sampled (x, r) with x on the augmented boundary and
// r dyadic in the resolved range.
AhlforsReport ahlfors_audit(const CubeFamily& fam, const AugmentResult& aug, int trials,
                            std::uint64_t seed);

// One stopped-time pass of the corona machinery on the augmented domain,
// with extended cubes S union their caps; emits packing and density-ratio
// rows for the side-by-side report.
std::string tilde_rerun_report(const CubeFamily& fam, const AugmentResult& aug,
                               const AugmentParams& params);

} // namespace hmlab
