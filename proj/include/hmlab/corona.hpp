#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmlab/cubes.hpp"

namespace hmlab {

struct CoronaParams {
    double A = 8.0;
    double delta = 0.03;
    double eps = 0.1;
    std::int64_t budget = 10000;  // paths per stencil point per root
    double shell = 1e-4;
    std::uint64_t seed = 1;
    int max_doublings = 2;  // budget escalation cap for straddling decisions
    // Deepest level scanned relative to the root. Thresholds scale like
    // (ell/ell_root)^d, so the relative depth bounds how small a threshold a
    // fixed budget must resolve; deeper boundary levels are reached by later
    // generations, which re-root the ratios.
    int scan_depth = 2;

    void validate() const;
};

enum class StopKind { HD, LD, None };

struct StopLabel {
    StopKind kind = StopKind::None;
    double measured_ratio = 0.0;  // the density estimate that triggered the stop
    double stderr_ = 0.0;
};

struct StopResult {
    CubeId root;
    std::vector<std::pair<CubeId, StopLabel>> stopped;  // maximal stopped cubes
    std::vector<CubeId> undecided;                      // CI straddles after escalation
    double undecided_leaf_mass = 0.0;  // sum (ell/ell_root)^d over undecided leaves
    double c5_observed = 0.0;          // max sup_S omega(S) / inf_S omega(2S)
    double hd_ratio_sum = 0.0;         // sum (ell/ell_root)^d over HD stops
    double ld_measure_sum = 0.0;       // sum of center-stencil omega(S) over LD stops
    std::int64_t paths_per_stencil = 0;
    int exclusivity_violations = 0;
};

// HD/LD stopping scan of the descendants of `root`, (1.21)-(1.22) with the
// inf/sup over B_root realized on a fixed 5-point stencil and 3-sigma
// confidence gating. Throws IndeterminacyError if the undecidable leaf mass
// exceeds 5% after budget escalation.
StopResult stop_children(const CubeFamily& fam, CubeId root, const CoronaParams& params);

struct CoronaTree {
    CubeId root;
    std::vector<std::vector<std::pair<CubeId, StopLabel>>> generations;  // G_1..G_kmax
    std::vector<double> packing_partial;  // partial sums of (ell/ell_root)^d
    std::vector<double> hd_sums;          // per generation
    std::vector<double> ld_sums;
    double undecided_leaf_mass = 0.0;
    double c5_observed = 0.0;

    std::string to_json(const CubeFamily& fam) const;
    std::string packing_csv() const;
};

CoronaTree generations(const CubeFamily& fam, CubeId root, const CoronaParams& params,
                       int kmax);

enum class PackingStrategy { AllMaximalLevels, GreedyMaxWeight };

// Lemma 4.1 style packing ratio: sum ell(S_j)^d / diam(B)^d over a
// pairwise-disjoint subfamily of cubes inside B.
double disjoint_packing(const CubeFamily& fam, const Ball& b, PackingStrategy strategy);

} // namespace hmlab
