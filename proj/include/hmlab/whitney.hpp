#pragma once

#include <vector>

#include "hmlab/geometry.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Whitney selection constants. The (17/16)-dilate rule gives c6 = 17/16;
// the parent's failure then guarantees a c7 = 25/8 hit (exactly: the
// parent's c6-box is contained in the child's (25/8)-box). Any c8 in
// (1, c6) works for the Case I/II split.
struct WhitneyConstants {
    double c6 = 17.0 / 16.0;
    double c7 = 25.0 / 8.0;
    double c8 = 33.0 / 32.0;
};

enum class CellCase { I, II, Unlabeled };

struct WhitneyCell {
    DyadicCube cube;
    CellCase label = CellCase::Unlabeled;
    double dist_to_boundary = 0.0;  // dist(center, boundary)
};

struct WhitneyDecomposition {
    std::vector<WhitneyCell> cells;     // canonical order: (level, kx, ky)
    double remainder_volume = 0.0;      // total volume of unresolved sub-min-side cells
    double remainder_side_d = 0.0;      // sum of side^d over those cells (d boundary dim)
    std::int64_t remainder_cells = 0;
    WhitneyConstants constants;
    double min_side = 0.0;
};

// Maximal dyadic cubes Q with c6 Q disjoint from the boundary, restricted
// to cubes meeting `region`, subdivided down to side >= min_side. Cubes
// whose c6-dilate still meets the boundary at min_side are reported in the
// remainder.
WhitneyDecomposition whitney_decompose(const Domain& dom, const Ball& region,
                                       double min_side);

// Case I iff c8 Q misses the other boundary.
CellCase classify_case(const WhitneyCell& cell, const Domain& other_boundary,
                       const WhitneyConstants& k = {});
void classify_all(WhitneyDecomposition& dec, const Domain& other_boundary);

// Exact predicate: does the c-dilate of the cube meet the domain boundary?
bool dilate_meets_boundary(const DyadicCube& cube, double c, const Domain& dom);

// Audit helpers -------------------------------------------------------------

// Asserts c6-miss and c7-hit for every cell; returns false listing nothing
// (callers report) if any cell fails.
bool check_whitney_properties(const WhitneyDecomposition& dec, const Domain& dom,
                              std::string* first_failure = nullptr);

// (2.2): no emitted cube is a strict ancestor of another and no duplicates.
bool check_disjointness(const WhitneyDecomposition& dec);

// Measured bounded-overlap constant: max over probe points of the number of
// c6-dilates containing the point. Probes are cell centers and corners.
int measured_overlap(const WhitneyDecomposition& dec);

// Sum of side^d over Case II cells meeting B, divided by radius^d.
double case2_mass_ratio(const WhitneyDecomposition& dec, const Ball& b, int d);

// CSV export: level,kx,ky,side,case,dist
std::string cells_to_csv(const WhitneyDecomposition& dec);

} // namespace hmlab
