#include "hmlab/corona.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

void CoronaParams::validate() const {
    if (!(eps > 0 && eps < 0.5)) throw UsageError("corona: eps in (0, 1/2)");
    if (!(delta >= 0 && delta < eps / 3.0)) throw UsageError("corona: need 0 <= delta < eps/3");
    if (!(A > 0)) throw UsageError("corona: A > 0");
    if (budget < 100) throw UsageError("corona: budget too small");
    if (scan_depth < 1) throw UsageError("corona: scan_depth >= 1");
}

namespace {

// Terminal positions (tree order) per stencil point; grows on demand when a
// decision straddles its threshold.
struct WalkSet {
    const CubeFamily* fam = nullptr;
    CubeId root;
    Vec2 stencil[5];
    double shell = 0.0;
    std::uint64_t seed = 0;
    std::int64_t paths = 0;
    std::vector<int> positions[5];  // sorted ranks of core terminals

    void ensure(std::int64_t want) {
        if (want <= paths) return;
        const Domain& dom = *fam->dom;
        for (int i = 0; i < 5; ++i) {
            CounterRng base(seed, stream::kCorona);
            CounterRng keyed = base.split(
                (static_cast<std::uint64_t>(root.level) << 40) ^
                (static_cast<std::uint64_t>(root.index) << 8) ^ static_cast<std::uint64_t>(i));
            std::vector<Terminal> terms(static_cast<std::size_t>(want - paths));
            std::int64_t base_idx = paths;
            parallel_for(want - paths, [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t k = lo; k < hi; ++k) {
                    CounterRng rng = keyed.split(static_cast<std::uint64_t>(base_idx + k));
                    terms[static_cast<std::size_t>(k)] =
                        walk_once(dom, stencil[i], shell, rng);
                }
            });
            auto& pos = positions[i];
            for (const Terminal& t : terms) {
                int p = fam->position_of_terminal(t);
                if (p >= 0) pos.push_back(p);
            }
            std::sort(pos.begin(), pos.end());
        }
        paths = want;
    }

    // fraction of paths with terminal position in [lo, hi)
    double frac_range(int i, int lo, int hi) const {
        const auto& pos = positions[i];
        auto a = std::lower_bound(pos.begin(), pos.end(), lo);
        auto b = std::lower_bound(pos.begin(), pos.end(), hi);
        return static_cast<double>(b - a) / static_cast<double>(paths);
    }
    double frac_runs(int i, const std::vector<std::pair<int, int>>& runs) const {
        const auto& pos = positions[i];
        std::int64_t count = 0;
        for (auto [lo, hi] : runs) {
            auto a = std::lower_bound(pos.begin(), pos.end(), lo);
            auto b = std::lower_bound(pos.begin(), pos.end(), hi);
            count += b - a;
        }
        return static_cast<double>(count) / static_cast<double>(paths);
    }
};

double bernoulli_se(double v, std::int64_t n) {
    return std::sqrt(std::max(0.0, v * (1.0 - v) / static_cast<double>(n)));
}

// Wilson score bounds at z = 3; unlike the Wald interval these stay honest
// at 0 or n hits.
double wilson_lower(double v, std::int64_t n) {
    const double z2 = 9.0;
    double nn = static_cast<double>(n);
    double denom = 1.0 + z2 / nn;
    double center = v + z2 / (2.0 * nn);
    double half = 3.0 * std::sqrt(v * (1.0 - v) / nn + z2 / (4.0 * nn * nn));
    return std::max(0.0, (center - half) / denom);
}
double wilson_upper(double v, std::int64_t n) {
    const double z2 = 9.0;
    double nn = static_cast<double>(n);
    double denom = 1.0 + z2 / nn;
    double center = v + z2 / (2.0 * nn);
    double half = 3.0 * std::sqrt(v * (1.0 - v) / nn + z2 / (4.0 * nn * nn));
    return std::min(1.0, (center + half) / denom);
}

struct Decision {
    StopKind kind = StopKind::None;
    bool straddle = false;
    double ratio = 0.0;   // triggering estimate
    double se = 0.0;
    double sup1_center = 0.0;  // center-stencil omega(S), for LD mass sums
    double c5_sample = 0.0;
    bool both = false;
};

Decision decide(const CubeFamily& fam, const Cube& s, const Cube& root, const WalkSet& ws,
                const CoronaParams& params) {
    Decision d;
    double ratio_d = std::pow(s.scale / root.scale, fam.dom->params.d);
    double thrA = params.A * ratio_d;
    double thrD = params.delta * ratio_d;
    bool ld_possible = thrD > 0;  // delta = 0 makes LD unreachable (omega > 0)
    const auto& runs2 = fam.dilated_runs(s, s.scale);  // 2S on samples
    double inf2_pt = 1e300, inf2_lcb = 1e300;
    double sup1_pt = -1e300, sup1_ucb = -1e300;
    for (int i = 0; i < 5; ++i) {
        double v2 = ws.frac_runs(i, runs2);
        inf2_pt = std::min(inf2_pt, v2);
        inf2_lcb = std::min(inf2_lcb, wilson_lower(v2, ws.paths));
        double v1 = ws.frac_range(i, s.lo, s.hi);
        sup1_pt = std::max(sup1_pt, v1);
        sup1_ucb = std::max(sup1_ucb, wilson_upper(v1, ws.paths));
        if (i == 0) d.sup1_center = v1;
    }
    if (inf2_pt > 0) d.c5_sample = sup1_pt / inf2_pt;
    bool hd = inf2_lcb >= thrA;
    bool ld = ld_possible && sup1_ucb <= thrD;
    if (hd && ld) d.both = true;
    if (hd) {
        d.kind = StopKind::HD;
        d.ratio = inf2_pt;
        d.se = bernoulli_se(inf2_pt, ws.paths);
        return d;
    }
    if (ld) {
        d.kind = StopKind::LD;
        d.ratio = sup1_pt;
        d.se = bernoulli_se(sup1_pt, ws.paths);
        return d;
    }
    // Straddle = the point estimate is decisively (a factor 3) on the stop
    // side of the threshold but the confidence bound cannot confirm it yet.
    // Estimates within a factor 3 of the threshold are left unstopped: the
    // stopping thresholds are only meaningful up to constants, and demanding
    // CI resolution exactly at delta would need unbounded budgets.
    if ((inf2_pt >= 3.0 * thrA && inf2_lcb < thrA) ||
        (ld_possible && sup1_pt <= thrD / 3.0 && sup1_ucb > thrD))
        d.straddle = true;
    return d;
}

} // namespace

StopResult stop_children(const CubeFamily& fam, CubeId root_id, const CoronaParams& params) {
    params.validate();
    const Cube& root = fam.cube(root_id);
    if (!(root.ball.radius > 0))
        throw PreconditionError("stop_children: corkscrew balls not attached");
    int jstop = std::min(fam.jmax, root_id.level + params.scan_depth);

    WalkSet ws;
    ws.fam = &fam;
    ws.root = root_id;
    ws.shell = params.shell;
    ws.seed = params.seed;
    double half = 0.5 * root.ball.radius;
    ws.stencil[0] = root.ball.center;
    ws.stencil[1] = root.ball.center + Vec2{half, 0.0};
    ws.stencil[2] = root.ball.center - Vec2{half, 0.0};
    ws.stencil[3] = root.ball.center + Vec2{0.0, half};
    ws.stencil[4] = root.ball.center - Vec2{0.0, half};
    ws.ensure(params.budget);

    StopResult out;
    out.root = root_id;
    std::int64_t budget_cap = params.budget << params.max_doublings;

    double scanned_leaf_mass = 0.0;  // stopped + undecided + unstopped frontier
    std::vector<CubeId> stack(root.children.rbegin(), root.children.rend());
    while (!stack.empty()) {
        CubeId id = stack.back();
        stack.pop_back();
        const Cube& s = fam.cube(id);
        Decision d = decide(fam, s, root, ws, params);
        while (d.straddle && ws.paths < budget_cap) {
            ws.ensure(std::min(budget_cap, ws.paths * 2));
            d = decide(fam, s, root, ws, params);
        }
        out.c5_observed = std::max(out.c5_observed, d.c5_sample);
        if (d.both) ++out.exclusivity_violations;
        double ratio_d = std::pow(s.scale / root.scale, fam.dom->params.d);
        if (d.kind == StopKind::HD) {
            out.stopped.push_back({id, {StopKind::HD, d.ratio, d.se}});
            out.hd_ratio_sum += ratio_d;
            scanned_leaf_mass += ratio_d;
            continue;
        }
        if (d.kind == StopKind::LD) {
            out.stopped.push_back({id, {StopKind::LD, d.ratio, d.se}});
            out.ld_measure_sum += d.sup1_center;
            scanned_leaf_mass += ratio_d;
            continue;
        }
        if (d.straddle) {
            out.undecided.push_back(id);
            if (id.level >= jstop || s.children.empty()) out.undecided_leaf_mass += ratio_d;
        }
        if (id.level < jstop && !s.children.empty()) {
            for (auto it = s.children.rbegin(); it != s.children.rend(); ++it)
                stack.push_back(*it);
        } else {
            scanned_leaf_mass += ratio_d;
        }
    }
    out.paths_per_stencil = ws.paths;
    // gate: undecidable fraction of the scan-frontier mass
    if (out.undecided_leaf_mass > 0.05 * std::max(scanned_leaf_mass, 1e-300)) {
        std::ostringstream os;
        os << "stop_children: undecidable leaf mass " << out.undecided_leaf_mass << " of "
           << scanned_leaf_mass << " (> 5%) at root (" << root_id.level << ","
           << root_id.index << ") with " << ws.paths << " paths/stencil";
        throw IndeterminacyError(os.str());
    }
    return out;
}

CoronaTree generations(const CubeFamily& fam, CubeId root_id, const CoronaParams& params,
                       int kmax) {
    if (kmax < 1) throw UsageError("generations: kmax >= 1");
    CoronaTree tree;
    tree.root = root_id;
    const Cube& root = fam.cube(root_id);
    std::vector<CubeId> frontier{root_id};
    double running = 0.0;
    for (int k = 1; k <= kmax && !frontier.empty(); ++k) {
        std::vector<std::pair<CubeId, StopLabel>> gen;
        double hd = 0.0, ld = 0.0;
        for (CubeId rid : frontier) {
            CoronaParams p = params;
            p.seed = params.seed + static_cast<std::uint64_t>(k) * 1000003ull;
            StopResult res = stop_children(fam, rid, p);
            tree.undecided_leaf_mass += res.undecided_leaf_mass;
            tree.c5_observed = std::max(tree.c5_observed, res.c5_observed);
            for (auto& [id, label] : res.stopped) {
                double r = std::pow(fam.cube(id).scale / root.scale, fam.dom->params.d);
                (label.kind == StopKind::HD ? hd : ld) += r;
                gen.push_back({id, label});
            }
        }
        running += hd + ld;
        tree.hd_sums.push_back(hd);
        tree.ld_sums.push_back(ld);
        tree.packing_partial.push_back(running);
        frontier.clear();
        for (auto& [id, label] : gen)
            if (!fam.cube(id).children.empty()) frontier.push_back(id);
        tree.generations.push_back(std::move(gen));
    }
    return tree;
}

double disjoint_packing(const CubeFamily& fam, const Ball& b, PackingStrategy strategy) {
    // cubes entirely inside B (max hull vertex distance <= radius)
    std::vector<CubeId> inside;
    for (const auto& level : fam.levels) {
        for (const Cube& c : level) {
            double far = 0.0;
            for (const Vec2& v : c.hull) far = std::max(far, dist(v, b.center));
            if (c.hull.empty()) far = dist(c.anchor, b.center);
            if (far <= b.radius) inside.push_back(c.id);
        }
    }
    double diam_d = std::pow(2.0 * b.radius, fam.dom->params.d);
    if (strategy == PackingStrategy::AllMaximalLevels) {
        // keep cubes with no candidate ancestor
        std::set<std::pair<int, int>> set_ids;
        for (CubeId id : inside) set_ids.insert({id.level, id.index});
        double sum = 0.0;
        for (CubeId id : inside) {
            bool has_anc = false;
            CubeId up = fam.cube(id).parent;
            while (up.valid()) {
                if (set_ids.count({up.level, up.index})) {
                    has_anc = true;
                    break;
                }
                up = fam.cube(up).parent;
            }
            if (!has_anc) sum += std::pow(fam.cube(id).scale, fam.dom->params.d);
        }
        return sum / diam_d;
    }
    // greedy by weight; disjointness = member-range disjointness
    std::sort(inside.begin(), inside.end(), [&](CubeId a, CubeId b2) {
        double wa = fam.cube(a).scale, wb = fam.cube(b2).scale;
        if (wa != wb) return wa > wb;
        return a < b2;
    });
    std::vector<std::pair<int, int>> taken;
    double sum = 0.0;
    for (CubeId id : inside) {
        const Cube& c = fam.cube(id);
        bool overlap = false;
        for (auto [lo, hi] : taken)
            if (lo < c.hi && c.lo < hi) {
                overlap = true;
                break;
            }
        if (overlap) continue;
        taken.push_back({c.lo, c.hi});
        sum += std::pow(c.scale, fam.dom->params.d);
    }
    return sum / diam_d;
}

std::string CoronaTree::to_json(const CubeFamily& fam) const {
    nlohmann::json j;
    j["root"] = {root.level, root.index};
    j["undecided_leaf_mass"] = undecided_leaf_mass;
    j["c5_observed"] = c5_observed;
    j["packing_partial"] = packing_partial;
    j["hd_sums"] = hd_sums;
    j["ld_sums"] = ld_sums;
    nlohmann::json jg = nlohmann::json::array();
    for (const auto& gen : generations) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& [id, label] : gen) {
            nlohmann::json e;
            e["level"] = id.level;
            e["index"] = id.index;
            e["kind"] = label.kind == StopKind::HD ? "HD" : "LD";
            e["measured_ratio"] = label.measured_ratio;
            e["stderr"] = label.stderr_;
            e["scale"] = fam.cube(id).scale;
            row.push_back(e);
        }
        jg.push_back(row);
    }
    j["generations"] = jg;
    return j.dump();
}

std::string CoronaTree::packing_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "generation,hd_sum,ld_sum,partial_sum\n";
    for (std::size_t k = 0; k < packing_partial.size(); ++k)
        os << (k + 1) << ',' << hd_sums[k] << ',' << ld_sums[k] << ',' << packing_partial[k]
           << '\n';
    return os.str();
}

} // namespace hmlab
