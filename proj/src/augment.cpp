#include "hmlab/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

// ---------------------------------------------------------------------------
// Caps
// ---------------------------------------------------------------------------

std::vector<Piece> CapSet::to_pieces(int capset_ordinal) const {
    std::vector<Piece> out;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        auto [mid, half] = caps[k];
        Piece p = make_arc(sphere.center, sphere.radius, mid - half, mid + half,
                           "cap." + std::to_string(host.level) + "." +
                               std::to_string(host.index) + "." + std::to_string(k));
        p.cap_host = capset_ordinal;
        out.push_back(p);
    }
    return out;
}

CapSet place_caps(const CubeFamily& fam, const Cube& s, double c18, int cap_count) {
    if (cap_count < 1) throw PreconditionError("place_caps: cap_count >= 1");
    if (!(s.ball.radius > 0)) throw PreconditionError("place_caps: cube has no corkscrew ball");
    CapSet cs;
    cs.host = s.id;
    cs.sphere = {s.ball.center, 1.5 * s.ball.radius};
    double total = c18 * std::pow(s.scale, fam.dom->params.d);
    double half = total / (2.0 * cs.sphere.radius) / cap_count;  // angular radius
    double pitch = kTwoPi / cap_count;
    if (pitch - 2.0 * half < 0.5 * half)
        throw CertificationError("place_caps: requested area too large for separated caps");
    for (int k = 0; k < cap_count; ++k) cs.caps.push_back({k * pitch, half});
    cs.area = total;
    return cs;
}

// ---------------------------------------------------------------------------
// Sigma
// ---------------------------------------------------------------------------

namespace {
// length of arc (center, R, [a0, a1]) inside the disc B(x, r)
double arc_in_ball_length(Vec2 c, double R, double a0, double a1, Vec2 x, double r) {
    double D = dist(c, x);
    if (D + R <= r) return R * (a1 - a0);          // whole circle inside
    if (D >= r + R || D + r <= R) return 0.0;      // disjoint or ball inside circle...
    // angular window on the hosting circle where |q - x| <= r
    double cosb = (D * D + R * R - r * r) / (2.0 * D * R);
    cosb = std::clamp(cosb, -1.0, 1.0);
    double beta = std::acos(cosb);
    double theta = std::atan2(x.y - c.y, x.x - c.x);
    // overlap of [theta - beta, theta + beta] with [a0, a1] mod 2 pi
    double w0 = theta - beta, w1 = theta + beta;
    double len = 0.0;
    for (int shift = -1; shift <= 1; ++shift) {
        double lo = std::max(a0, w0 + shift * kTwoPi);
        double hi = std::min(a1, w1 + shift * kTwoPi);
        if (hi > lo) len += hi - lo;
    }
    return R * len;
}
} // namespace

double SigmaMeasure::ball_mass(const CubeFamily& fam, Vec2 c, double r) const {
    double mass = 0.0;
    std::vector<std::pair<int, int>> cand;
    fam.samples.candidates(c, r, cand);
    for (auto [lo, hi] : cand)
        for (int u = lo; u < hi; ++u) {
            if (sample_mass[static_cast<std::size_t>(u)] == 0.0) continue;
            if (dist(fam.samples.pos[static_cast<std::size_t>(u)], c) <= r)
                mass += sample_mass[static_cast<std::size_t>(u)];
        }
    for (const CapSet& cs : caps) {
        if (dist(cs.sphere.center, c) > r + cs.sphere.radius) continue;
        for (auto [mid, half] : cs.caps)
            mass += arc_in_ball_length(cs.sphere.center, cs.sphere.radius, mid - half,
                                       mid + half, c, r);
    }
    return mass;
}

// ---------------------------------------------------------------------------
// Tilde stopping
// ---------------------------------------------------------------------------

namespace {

double wilson_lower3(double v, std::int64_t n) {
    const double z2 = 9.0;
    double nn = static_cast<double>(n);
    double denom = 1.0 + z2 / nn;
    double center = v + z2 / (2.0 * nn);
    double half = 3.0 * std::sqrt(v * (1.0 - v) / nn + z2 / (4.0 * nn * nn));
    return std::max(0.0, (center - half) / denom);
}
double wilson_upper3(double v, std::int64_t n) {
    const double z2 = 9.0;
    double nn = static_cast<double>(n);
    double denom = 1.0 + z2 / nn;
    double center = v + z2 / (2.0 * nn);
    double half = 3.0 * std::sqrt(v * (1.0 - v) / nn + z2 / (4.0 * nn * nn));
    return std::min(1.0, (center + half) / denom);
}

// walk terminals from one point in the current augmented domain
struct TildeWalks {
    std::vector<int> positions;       // sorted tree positions of base terminals
    std::vector<Terminal> cap_terms;  // terminals on cap pieces
    std::int64_t paths = 0;

    void grow(const Domain& aug, const CubeFamily& fam, Vec2 p, double shell,
              std::int64_t want, CounterRng keyed) {
        if (want <= paths) return;
        std::vector<Terminal> terms(static_cast<std::size_t>(want - paths));
        std::int64_t base_idx = paths;
        parallel_for(want - paths, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t k = lo; k < hi; ++k) {
                CounterRng rng = keyed.split(static_cast<std::uint64_t>(base_idx + k));
                terms[static_cast<std::size_t>(k)] = walk_once(aug, p, shell, rng);
            }
        });
        for (const Terminal& t : terms) {
            if (t.capped || t.piece < 0) continue;
            if (aug.pieces[static_cast<std::size_t>(t.piece)].cap_host >= 0) {
                cap_terms.push_back(t);
            } else {
                int pos = fam.position_of_terminal(t);
                if (pos >= 0) positions.push_back(pos);
            }
        }
        std::sort(positions.begin(), positions.end());
        paths = want;
    }

    double frac_positions(const std::vector<std::pair<int, int>>& runs) const {
        std::int64_t count = 0;
        for (auto [lo, hi] : runs) {
            auto a = std::lower_bound(positions.begin(), positions.end(), lo);
            auto b = std::lower_bound(positions.begin(), positions.end(), hi);
            count += b - a;
        }
        return static_cast<double>(count) / static_cast<double>(paths);
    }
};

} // namespace

AugmentResult build_augmented(const CubeFamily& fam, const AugmentParams& params) {
    if (params.depth < 1) throw UsageError("augment: depth >= 1");
    if (!(fam.c3 > 0)) throw PreconditionError("augment: corkscrew balls not attached");
    const Domain& base = *fam.dom;
    AugmentResult out;
    out.augmented = base;
    out.lambda_dilate = params.lambda_dilate > 0 ? params.lambda_dilate : 1.0 + fam.c3 / 2.0;
    // (7.4): lambda - 1 below the gap to 4B_S, in scale units
    if (!(out.lambda_dilate - 1.0 < 4.0 * fam.c3))
        throw UsageError("augment: lambda dilation too large for (7.4)");
    out.sigma.depth = params.depth;
    out.sigma.sample_mass.assign(static_cast<std::size_t>(fam.samples.size()), 0.0);

    std::vector<CubeId> roots;
    for (const Cube& c : fam.levels[0]) roots.push_back(c.id);

    // --- (7.2)/(7.3) gate measure -------------------------------------------
    // omega(p_S, F_S, Omega*) in the minimal admissible Omega* =
    // (Omega_n minus F_S) cap B(x_S, c0 ell): ball-restricted walk with the
    // probe caps absorbing. Boundary hits inside the ball lie in S by
    // (1.14), so the closure measure (7.3) is 1 - sphere exits.
    struct GateMeasure {
        double cap_frac = 0.0;
        double closure = 0.0;
    };
    constexpr int kProbeHost = 1 << 28;
    auto cap_gate_measure = [&](const Cube& s, double c18_try, const Domain& domain_now,
                                std::uint64_t salt) {
        CapSet cs = place_caps(fam, s, c18_try, params.cap_count);
        Domain probe = domain_now;
        probe.add_cap_pieces(cs.to_pieces(kProbeHost));
        Ball clip{s.anchor, fam.c0 * s.scale};
        double shell = std::min(params.shell, 1e-3 * fam.c0 * s.scale);
        CounterRng keyed = CounterRng(params.seed, stream::kAugment).split(salt);
        std::int64_t n = params.cap_budget;
        std::int64_t chunks = (n + kChunk - 1) / kChunk;
        std::vector<std::int64_t> cap_hits(static_cast<std::size_t>(chunks), 0);
        std::vector<std::int64_t> sphere_exits(static_cast<std::size_t>(chunks), 0);
        parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
            std::int64_t h = 0, sph = 0;
            for (std::int64_t k = lo; k < hi; ++k) {
                CounterRng rng = keyed.split(static_cast<std::uint64_t>(k));
                Terminal t = walk_once_in_ball(probe, clip, s.ball.center, shell, rng);
                if (t.capped) continue;
                if (t.piece == kSpherePiece)
                    ++sph;
                else if (t.piece >= 0 &&
                         probe.pieces[static_cast<std::size_t>(t.piece)].cap_host == kProbeHost)
                    ++h;
            }
            cap_hits[static_cast<std::size_t>(lo / kChunk)] = h;
            sphere_exits[static_cast<std::size_t>(lo / kChunk)] = sph;
        });
        std::int64_t h = 0, sph = 0;
        for (std::int64_t v : cap_hits) h += v;
        for (std::int64_t v : sphere_exits) sph += v;
        GateMeasure g;
        g.cap_frac = static_cast<double>(h) / static_cast<double>(n);
        g.closure = 1.0 - static_cast<double>(sph) / static_cast<double>(n);
        return g;
    };

    double c18 = params.c18;
    if (c18 <= 0) {
        const Cube& probe_cube = fam.cube(roots[0]);
        // hi: caps cover at most 80% of the hosting circle (separation slack)
        double lo = 0.02 * fam.c3;
        double hi = 0.8 * kTwoPi * 1.5 * fam.c3;
        double v_hi = cap_gate_measure(probe_cube, hi, base, 1).cap_frac;
        double v_lo = cap_gate_measure(probe_cube, lo, base, 2).cap_frac;
        if (v_hi < 0.5 || v_lo > 0.5) {
            c18 = v_hi < 0.5 ? hi : lo;  // take the closest attainable
        } else {
            for (int it = 0; it < 20; ++it) {
                double mid = 0.5 * (lo + hi);
                double v = cap_gate_measure(probe_cube, mid, base,
                                            3 + static_cast<std::uint64_t>(it))
                               .cap_frac;
                if (v >= 0.45 && v <= 0.55) {
                    lo = hi = mid;
                    break;
                }
                (v < 0.5 ? lo : hi) = mid;
            }
            c18 = 0.5 * (lo + hi);
        }
        double check = cap_gate_measure(probe_cube, c18, base, 101).cap_frac;
        if (check < params.gate_lo || check > params.gate_hi)
            throw CalibrationError("augment: c18 calibration failed after bisection (measured " +
                                   std::to_string(check) + ")");
    }
    out.c18 = c18;

    // --- generation recursion ----------------------------------------------
    struct Frontier {
        CubeId id;
        CubeId top_root;  // level-0 ancestor, for (7.10) accounting
    };
    std::vector<Frontier> frontier;
    for (CubeId r : roots) frontier.push_back({r, r});
    std::map<std::pair<int, int>, double> packing_by_root;  // (7.10) partial sums

    double dpow = fam.dom->params.d;
    std::int64_t cap_ordinal = 0;
    // stopped cube ranges per generation for K_n bookkeeping
    for (int gen = 1; gen <= params.depth && !frontier.empty(); ++gen) {
        std::vector<TildeStop> stops_this_gen;
        std::vector<Frontier> next;
        std::vector<CapSet> new_caps;
        for (const Frontier& fr : frontier) {
            const Cube& root = fam.cube(fr.id);
            int jstop = std::min(fam.jmax, fr.id.level + params.scan_depth);
            TildeWalks ws;
            CounterRng keyed = CounterRng(params.seed, stream::kAugment)
                                   .split((static_cast<std::uint64_t>(gen) << 48) ^
                                          (static_cast<std::uint64_t>(fr.id.level) << 32) ^
                                          static_cast<std::uint64_t>(fr.id.index));
            ws.grow(out.augmented, fam, root.ball.center, params.shell, params.budget, keyed);
            std::int64_t cap_budget_paths = params.budget << params.max_doublings;

            // extended-cube helpers against the *current* caps
            auto in_subtree = [&](const CapSet& cs, const Cube& s) {
                const Cube& host = fam.cube(cs.host);
                return host.lo >= s.lo && host.hi <= s.hi;
            };
            auto frac_extended = [&](const Cube& s, bool dilated) {
                double radius = dilated ? (out.lambda_dilate - 1.0) * s.scale : -1.0;
                const std::vector<std::pair<int, int>>* runs;
                std::vector<std::pair<int, int>> plain{{s.lo, s.hi}};
                if (dilated)
                    runs = &fam.dilated_runs(s, radius);
                else
                    runs = &plain;
                double v = ws.frac_positions(*runs);
                // cap terminals: host inside S, or (dilated) within reach
                std::int64_t extra = 0;
                for (const Terminal& t : ws.cap_terms) {
                    int ord = out.augmented.pieces[static_cast<std::size_t>(t.piece)].cap_host;
                    const CapSet& cs = out.sigma.caps[static_cast<std::size_t>(ord)];
                    if (in_subtree(cs, s)) {
                        ++extra;
                    } else if (dilated) {
                        // distance from the terminal point to the cube samples
                        bool close = false;
                        for (const Vec2& h : fam.cube(s.id).hull)
                            if (dist(h, t.point) <= radius) {
                                close = true;
                                break;
                            }
                        if (close) {
                            std::vector<std::pair<int, int>> cand;
                            fam.samples.candidates(t.point, radius, cand);
                            for (auto [clo, chi] : cand) {
                                for (int u = clo; u < chi; ++u) {
                                    int pos = fam.rank[static_cast<std::size_t>(u)];
                                    if (pos < s.lo || pos >= s.hi) continue;
                                    if (dist(t.point, fam.samples.pos[static_cast<std::size_t>(u)]) <=
                                        radius) {
                                        ++extra;
                                        close = false;
                                        break;
                                    }
                                }
                                if (!close) break;
                            }
                        }
                    }
                }
                return v + static_cast<double>(extra) / static_cast<double>(ws.paths);
            };

            // scan descendants (maximal stopped)
            std::vector<CubeId> local_stopped;
            std::vector<CubeId> stack(root.children.rbegin(), root.children.rend());
            while (!stack.empty()) {
                CubeId id = stack.back();
                stack.pop_back();
                const Cube& s = fam.cube(id);
                double ratio_d = std::pow(s.scale / root.scale, dpow);
                double thrA = params.A * ratio_d;
                double thrD = params.delta * ratio_d;
                bool decided = false;
                StopKind kind = StopKind::None;
                double measured = 0.0;
                for (;;) {
                    double v2 = frac_extended(s, true);
                    double v1 = frac_extended(s, false);
                    bool hd = wilson_lower3(v2, ws.paths) >= thrA;
                    bool ld = thrD > 0 && wilson_upper3(v1, ws.paths) <= thrD;
                    if (hd) {
                        decided = true;
                        kind = StopKind::HD;
                        measured = v2;
                        break;
                    }
                    if (ld) {
                        decided = true;
                        kind = StopKind::LD;
                        measured = v1;
                        break;
                    }
                    bool straddle = (v2 >= thrA && wilson_lower3(v2, ws.paths) < thrA) ||
                                    (thrD > 0 && v1 <= thrD && wilson_upper3(v1, ws.paths) > thrD);
                    if (!straddle) break;
                    if (ws.paths >= cap_budget_paths) {
                        if (id.level >= jstop || s.children.empty())
                            out.undecided_leaf_mass += ratio_d;
                        break;
                    }
                    ws.grow(out.augmented, fam, root.ball.center, params.shell,
                            std::min(cap_budget_paths, ws.paths * 2), keyed);
                }
                if (decided) {
                    local_stopped.push_back(id);
                    TildeStop ts;
                    ts.id = id;
                    ts.kind = kind;
                    ts.measured = measured;
                    stops_this_gen.push_back(ts);
                    packing_by_root[{fr.top_root.level, fr.top_root.index}] +=
                        std::pow(s.scale / fam.cube(fr.top_root).scale, dpow);
                    continue;
                }
                if (id.level < jstop)
                    for (auto it = s.children.rbegin(); it != s.children.rend(); ++it)
                        stack.push_back(*it);
            }

            // mu_{gen} contribution: root-scaled hitting mass on K = S minus stops
            {
                std::vector<std::pair<int, int>> kruns{{root.lo, root.hi}};
                std::vector<std::pair<int, int>> cut;
                for (CubeId sid : local_stopped) cut.push_back({fam.cube(sid).lo, fam.cube(sid).hi});
                std::sort(cut.begin(), cut.end());
                std::vector<std::pair<int, int>> kept;
                int at = root.lo;
                for (auto [clo, chi] : cut) {
                    if (clo > at) kept.push_back({at, clo});
                    at = std::max(at, chi);
                }
                if (at < root.hi) kept.push_back({at, root.hi});
                double w = std::pow(root.scale, dpow) / static_cast<double>(ws.paths);
                for (auto [klo, khi] : kept) {
                    auto a = std::lower_bound(ws.positions.begin(), ws.positions.end(), klo);
                    auto b = std::lower_bound(ws.positions.begin(), ws.positions.end(), khi);
                    for (auto it = a; it != b; ++it) {
                        int u = fam.tree_order[static_cast<std::size_t>(*it)];
                        out.sigma.sample_mass[static_cast<std::size_t>(u)] += w;
                        out.sigma.mu_mass += w;
                    }
                }
            }

            // place caps on the new stops and run the (7.2)/(7.3) gates
            for (CubeId sid : local_stopped) {
                const Cube& s = fam.cube(sid);
                CapSet cs = place_caps(fam, s, c18, params.cap_count);
                GateMeasure gate = cap_gate_measure(
                    s, c18, out.augmented,
                    0xC0FFEEull + static_cast<std::uint64_t>(cap_ordinal));
                double cse = std::sqrt(std::max(
                    0.0, gate.closure * (1.0 - gate.closure) /
                             static_cast<double>(params.cap_budget)));
                for (auto& ts : stops_this_gen)
                    if (ts.id == sid) {
                        ts.cap_measure = gate.cap_frac;
                        ts.closure_measure = gate.closure;
                        ts.capset = static_cast<int>(cap_ordinal);
                    }
                ++out.processed;
                if (gate.cap_frac >= params.gate_lo && gate.cap_frac <= params.gate_hi)
                    ++out.gate_pass;
                if (gate.closure > 1.0 - params.eps - 3.0 * cse) ++out.closure_pass;
                out.sigma.nu_mass += cs.area;
                new_caps.push_back(cs);
                ++cap_ordinal;
                if (!fam.cube(sid).children.empty()) next.push_back({sid, fr.top_root});
            }
        }
        // Omega_{gen+1}: absorb all new caps
        for (CapSet& cs : new_caps) {
            int ord = static_cast<int>(out.sigma.caps.size());
            out.augmented.add_cap_pieces(cs.to_pieces(ord));
            out.sigma.caps.push_back(std::move(cs));
        }
        out.generations.push_back(std::move(stops_this_gen));
        frontier = std::move(next);
    }

    double worst = 0.0;
    for (auto& [rid, sum] : packing_by_root) worst = std::max(worst, sum);
    out.packing_partial.push_back(worst);

    // --- (7.7) audit: sigma mass of extended cubes in the processed trees --
    {
        double c17 = params.delta / 2.0;
        for (const auto& gen : out.generations) {
            for (const TildeStop& ts : gen) {
                const Cube& s = fam.cube(ts.id);
                double mass = 0.0;
                for (int pos = s.lo; pos < s.hi; ++pos) {
                    int u = fam.tree_order[static_cast<std::size_t>(pos)];
                    mass += out.sigma.sample_mass[static_cast<std::size_t>(u)];
                }
                for (const CapSet& cs : out.sigma.caps) {
                    const Cube& host = fam.cube(cs.host);
                    if (host.lo >= s.lo && host.hi <= s.hi) mass += cs.area;
                }
                double ld = std::pow(s.scale, dpow);
                double ratio = mass / ld;
                ++out.sigma_audit.cubes;
                out.sigma_audit.min_ratio = std::min(out.sigma_audit.min_ratio, ratio);
                out.sigma_audit.max_ratio = std::max(out.sigma_audit.max_ratio, ratio);
                if (ratio >= 0.5 * c17 && ratio <= (c18 + 1.0) * 1.5) ++out.sigma_audit.pass;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ahlfors audit
// ---------------------------------------------------------------------------

AhlforsReport ahlfors_audit(const CubeFamily& fam, const AugmentResult& aug, int trials,
                            std::uint64_t seed) {
    if (trials < 1) throw PreconditionError("ahlfors_audit: trials >= 1");
    AhlforsReport rep;
    rep.trials = trials;
    double diam = 0.0;
    for (const Cube& c : fam.levels[0]) diam = std::max(diam, c.diam);
    rep.r_max = diam / 2.0;
    rep.r_min = std::max(64.0 * fam.samples.spacing, rep.r_max * std::ldexp(1.0, -10));
    CounterRng rng(seed, stream::kAudit);
    int n_caps = static_cast<int>(aug.sigma.caps.size());
    for (int t = 0; t < trials; ++t) {
        Vec2 x;
        if (n_caps > 0 && t % 3 == 2) {
            const CapSet& cs =
                aug.sigma.caps[static_cast<std::size_t>(rng.next_u64() % static_cast<std::uint64_t>(n_caps))];
            auto [mid, half] = cs.caps[static_cast<std::size_t>(
                rng.next_u64() % static_cast<std::uint64_t>(cs.caps.size()))];
            double a = mid + (2.0 * rng.uniform() - 1.0) * half;
            x = cs.sphere.center + Vec2{std::cos(a), std::sin(a)} * cs.sphere.radius;
        } else {
            int u = static_cast<int>(rng.next_u64() %
                                     static_cast<std::uint64_t>(fam.samples.size()));
            x = fam.samples.pos[static_cast<std::size_t>(u)];
        }
        int klo = 0, khi = static_cast<int>(std::floor(std::log2(rep.r_max / rep.r_min)));
        int k = klo + static_cast<int>(rng.next_u64() %
                                       static_cast<std::uint64_t>(std::max(1, khi - klo + 1)));
        double r = rep.r_max / std::ldexp(1.0, k);
        double mass = aug.sigma.ball_mass(fam, x, r);
        double ratio = mass / std::pow(r, fam.dom->params.d);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.constant = std::max(rep.max_ratio, rep.min_ratio > 0 ? 1.0 / rep.min_ratio : 1e300);
    return rep;
}

// ---------------------------------------------------------------------------
// Section-8 style rerun report
// ---------------------------------------------------------------------------

std::string tilde_rerun_report(const CubeFamily& fam, const AugmentResult& aug,
                               const AugmentParams& params) {
    // one stopping pass on the final augmented domain with extended cubes
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    double dpow = fam.dom->params.d;
    for (const Cube& root : fam.levels[0]) {
        TildeWalks ws;
        CounterRng keyed = CounterRng(params.seed, stream::kAugment)
                               .split(0xAB0ull ^ static_cast<std::uint64_t>(root.id.index));
        ws.grow(aug.augmented, fam, root.ball.center, params.shell, params.budget, keyed);
        double hd_sum = 0.0, ld_sum = 0.0;
        double min_density = 1e300, max_density = 0.0;
        int jstop = std::min(fam.jmax, root.id.level + params.scan_depth);
        std::vector<CubeId> stack(root.children.rbegin(), root.children.rend());
        while (!stack.empty()) {
            CubeId id = stack.back();
            stack.pop_back();
            const Cube& s = fam.cube(id);
            double ratio_d = std::pow(s.scale / root.scale, dpow);
            // extended cube = S plus caps hosted in its subtree
            std::vector<std::pair<int, int>> plain{{s.lo, s.hi}};
            double v = ws.frac_positions(plain);
            for (const Terminal& t : ws.cap_terms) {
                int ord = aug.augmented.pieces[static_cast<std::size_t>(t.piece)].cap_host;
                const Cube& host = fam.cube(aug.sigma.caps[static_cast<std::size_t>(ord)].host);
                if (host.lo >= s.lo && host.hi <= s.hi) v += 1.0 / static_cast<double>(ws.paths);
            }
            double density = v / ratio_d;
            min_density = std::min(min_density, density);
            max_density = std::max(max_density, density);
            if (v >= params.A * ratio_d) {
                hd_sum += ratio_d;
                continue;
            }
            if (v <= params.delta * ratio_d) {
                ld_sum += ratio_d;
                continue;
            }
            if (id.level < jstop)
                for (auto it = s.children.rbegin(); it != s.children.rend(); ++it)
                    stack.push_back(*it);
        }
        nlohmann::json row;
        row["root"] = {root.id.level, root.id.index};
        row["hd_sum"] = hd_sum;
        row["ld_sum"] = ld_sum;
        row["min_density"] = min_density;
        row["max_density"] = max_density;
        rows.push_back(row);
    }
    j["tilde_rerun"] = rows;
    return j.dump();
}

std::string AhlforsReport::to_json() const {
    nlohmann::json j;
    j["trials"] = trials;
    j["min_ratio"] = min_ratio;
    j["max_ratio"] = max_ratio;
    j["constant"] = constant;
    j["r_min"] = r_min;
    j["r_max"] = r_max;
    return j.dump();
}

std::string AugmentResult::to_json() const {
    nlohmann::json j;
    j["c18"] = c18;
    j["lambda_dilate"] = lambda_dilate;
    j["mu_mass"] = sigma.mu_mass;
    j["nu_mass"] = sigma.nu_mass;
    j["sigma_mass"] = sigma.total();
    j["processed"] = processed;
    j["gate_pass"] = gate_pass;
    j["closure_pass"] = closure_pass;
    j["undecided_leaf_mass"] = undecided_leaf_mass;
    j["packing_partial"] = packing_partial;
    j["caps"] = sigma.caps.size();
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& gen : generations) {
        nlohmann::json row = nlohmann::json::array();
        for (const TildeStop& ts : gen) {
            nlohmann::json e;
            e["level"] = ts.id.level;
            e["index"] = ts.id.index;
            e["kind"] = ts.kind == StopKind::HD ? "HD" : "LD";
            e["measured"] = ts.measured;
            e["cap_measure"] = ts.cap_measure;
            row.push_back(e);
        }
        gens.push_back(row);
    }
    j["generations"] = gens;
    nlohmann::json audit;
    audit["cubes"] = sigma_audit.cubes;
    audit["pass"] = sigma_audit.pass;
    audit["min_ratio"] = sigma_audit.min_ratio;
    audit["max_ratio"] = sigma_audit.max_ratio;
    j["sigma_audit_7_7"] = audit;
    return j.dump();
}

} // namespace hmlab
