#include "hmlab/cubes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"
#include "hmlab/svg.hpp"

namespace hmlab {

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

BoundarySampleSet sample_boundary(const Domain& dom, double spacing) {
    if (!(spacing > 0)) throw PreconditionError("sample_boundary: spacing must be > 0");
    BoundarySampleSet s;
    s.dom = &dom;
    s.spacing = spacing;
    int np = static_cast<int>(dom.pieces.size());
    s.piece_first.assign(static_cast<std::size_t>(np), -1);
    s.piece_count.assign(static_cast<std::size_t>(np), 0);
    s.piece_step.assign(static_cast<std::size_t>(np), 0.0);
    for (int pi = 0; pi < np; ++pi) {
        const Piece& pc = dom.pieces[static_cast<std::size_t>(pi)];
        if (pc.is_window || pc.cap_host >= 0) continue;
        double len = pc.length();
        int m = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        double step = len / m;
        s.piece_first[static_cast<std::size_t>(pi)] = s.size();
        s.piece_count[static_cast<std::size_t>(pi)] = m;
        s.piece_step[static_cast<std::size_t>(pi)] = step;
        s.core_ids.push_back(pi);
        for (int k = 0; k < m; ++k) {
            s.pos.push_back(pc.point_at((k + 0.5) * step));
            s.piece.push_back(pi);
        }
    }
    if (s.size() == 0) throw PreconditionError("sample_boundary: no core boundary pieces");
    return s;
}

int BoundarySampleSet::snap(int piece_id, double arc) const {
    int first = piece_first[static_cast<std::size_t>(piece_id)];
    if (first < 0) return -1;
    int count = piece_count[static_cast<std::size_t>(piece_id)];
    double step = piece_step[static_cast<std::size_t>(piece_id)];
    int k = static_cast<int>(std::floor(arc / step));
    k = std::clamp(k, 0, count - 1);
    return first + k;
}

int BoundarySampleSet::snap_terminal(const Terminal& t) const {
    if (t.capped || t.piece < 0 || t.piece >= static_cast<int>(piece_first.size())) return -1;
    return snap(t.piece, static_cast<double>(t.arc));
}

void BoundarySampleSet::candidates(Vec2 p, double R,
                                   std::vector<std::pair<int, int>>& out) const {
    out.clear();
    auto add_piece_range = [&](int pi) {
        int first = piece_first[static_cast<std::size_t>(pi)];
        if (first < 0) return;
        const Piece& pc = dom->pieces[static_cast<std::size_t>(pi)];
        int count = piece_count[static_cast<std::size_t>(pi)];
        double step = piece_step[static_cast<std::size_t>(pi)];
        if (pc.kind == Piece::Kind::Segment) {
            // samples within R of p lie in an exact arclength interval
            Vec2 ab = pc.b - pc.a;
            double len = ab.norm();
            Vec2 dir = ab / len;
            double t = (p - pc.a).dot(dir);
            double perp2 = (p - pc.a - dir * t).norm2();
            double w2 = R * R - perp2;
            if (w2 < 0) return;
            double w = std::sqrt(w2);
            double a0 = std::max(0.0, t - w), a1 = std::min(len, t + w);
            if (a0 > a1) return;
            int k0 = std::clamp(static_cast<int>(std::floor(a0 / step)), 0, count - 1);
            int k1 = std::clamp(static_cast<int>(std::floor(a1 / step)), 0, count - 1);
            out.emplace_back(first + k0, first + k1 + 1);
        } else {
            if (pc.bbox().exterior_dist(p) <= R) out.emplace_back(first, first + count);
        }
    };
    if (dom->kind == DomainKind::CantorComplement) {
        std::vector<int> leaves;
        dom->cantor_leaves_near(p, R, leaves);
        std::sort(leaves.begin(), leaves.end());
        for (int leaf : leaves) {
            int fp = dom->cantor_leaf_first_piece(leaf);
            for (int k = 0; k < 4; ++k) add_piece_range(fp + k);
        }
        return;
    }
    for (int pi : core_ids) add_piece_range(pi);
}

// ---------------------------------------------------------------------------
// Local hash grid over a point subset
// ---------------------------------------------------------------------------

namespace {
struct HashGrid {
    double cell = 1.0;
    std::unordered_map<std::uint64_t, std::vector<int>> bins;

    static std::uint64_t key(std::int64_t ix, std::int64_t iy) {
        return (static_cast<std::uint64_t>(ix) << 32) ^
               (static_cast<std::uint64_t>(iy) & 0xffffffffull);
    }
    std::int64_t coord(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell));
    }
    void insert(Vec2 p, int id) { bins[key(coord(p.x), coord(p.y))].push_back(id); }

    template <class F>
    void for_neighbors(Vec2 p, double radius, F&& f) const {
        std::int64_t r = static_cast<std::int64_t>(std::ceil(radius / cell)) + 1;
        std::int64_t cx = coord(p.x), cy = coord(p.y);
        for (std::int64_t ix = cx - r; ix <= cx + r; ++ix) {
            for (std::int64_t iy = cy - r; iy <= cy + r; ++iy) {
                auto it = bins.find(key(ix, iy));
                if (it == bins.end()) continue;
                for (int id : it->second)
                    if (f(id)) return;
            }
        }
    }
};
} // namespace

// ---------------------------------------------------------------------------
// Nets
// ---------------------------------------------------------------------------

RadiusChoice choose_radius(const BoundarySampleSet& samples, Vec2 x, int j, int N,
                           double eta) {
    double sep = std::ldexp(1.0, -N * j);
    double s = eta * eta * sep;
    int steps = std::max(1, static_cast<int>(std::ceil(1.0 / eta)) - 1);
    std::vector<std::pair<int, int>> cand;
    samples.candidates(x, (1.0 + eta) * sep + s, cand);

    RadiusChoice best;
    best.m = std::numeric_limits<int>::max();
    for (int i = 1; i <= steps; ++i) {
        double r = sep * (1.0 + i * eta * eta);
        // collar candidates live in the annulus (r-s, r+s)
        std::vector<int> ann;
        std::vector<char> inside;
        for (auto [lo, hi] : cand) {
            for (int u = lo; u < hi; ++u) {
                double d = dist(samples.pos[static_cast<std::size_t>(u)], x);
                if (d > r - s && d < r + s) {
                    ann.push_back(u);
                    inside.push_back(d < r ? 1 : 0);
                }
            }
        }
        HashGrid grid;
        grid.cell = s;
        for (int k = 0; k < static_cast<int>(ann.size()); ++k)
            grid.insert(samples.pos[static_cast<std::size_t>(ann[static_cast<std::size_t>(k)])], k);
        // a collar member is an annulus sample with an opposite-side sample
        // strictly within s
        std::vector<Vec2> collar;
        for (int k = 0; k < static_cast<int>(ann.size()); ++k) {
            Vec2 u = samples.pos[static_cast<std::size_t>(ann[static_cast<std::size_t>(k)])];
            bool hit = false;
            grid.for_neighbors(u, s, [&](int other) {
                if (inside[static_cast<std::size_t>(other)] == inside[static_cast<std::size_t>(k)])
                    return false;
                Vec2 v = samples.pos[static_cast<std::size_t>(ann[static_cast<std::size_t>(other)])];
                if (dist(u, v) < s) {
                    hit = true;
                    return true;
                }
                return false;
            });
            if (hit) collar.push_back(u);
        }
        // greedy maximal s-separated subset covers the collar with s-balls
        HashGrid cover;
        cover.cell = s;
        std::vector<Vec2> chosen;
        for (Vec2 u : collar) {
            bool near = false;
            cover.for_neighbors(u, s, [&](int id) {
                if (dist(u, chosen[static_cast<std::size_t>(id)]) < s) {
                    near = true;
                    return true;
                }
                return false;
            });
            if (!near) {
                cover.insert(u, static_cast<int>(chosen.size()));
                chosen.push_back(u);
            }
        }
        int m = static_cast<int>(chosen.size());
        if (m < best.m) {
            best.m = m;
            best.radius = r;
        }
    }
    return best;
}

std::vector<Net> build_nets(const BoundarySampleSet& samples, int N, int jmax, double eta) {
    if (N < 1 || jmax < 0) throw PreconditionError("build_nets: N >= 1 and jmax >= 0");
    double need = std::ldexp(1.0, -N * jmax) / 8.0;
    if (samples.spacing > need * (1.0 + 1e-12))
        throw ResolutionError("build_nets: sample spacing too coarse for jmax");
    // level-0 nets start from the most central sample; the root balls must
    // reach the whole boundary when diam is comparable to the separation
    Vec2 centroid{0.0, 0.0};
    for (int u = 0; u < samples.size(); ++u) centroid += samples.pos[static_cast<std::size_t>(u)];
    centroid = centroid / static_cast<double>(samples.size());
    int central = 0;
    double best_c = 1e300;
    for (int u = 0; u < samples.size(); ++u) {
        double d = dist(samples.pos[static_cast<std::size_t>(u)], centroid);
        if (d < best_c) {
            best_c = d;
            central = u;
        }
    }
    std::vector<Net> nets;
    for (int j = 0; j <= jmax; ++j) {
        Net net;
        net.level = j;
        net.separation = std::ldexp(1.0, -N * j);
        HashGrid grid;
        grid.cell = net.separation;
        auto admit = [&](int u) {
            Vec2 p = samples.pos[static_cast<std::size_t>(u)];
            bool near = false;
            grid.for_neighbors(p, net.separation, [&](int id) {
                if (dist(p, samples.pos[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(id)])]) <
                    net.separation) {
                    near = true;
                    return true;
                }
                return false;
            });
            if (!near) {
                grid.insert(p, static_cast<int>(net.sample.size()));
                net.sample.push_back(u);
            }
        };
        if (j == 0) {
            // single root whenever one admissible ball covers the boundary
            // (the construction's S_0 is the whole boundary when diam ~ 1)
            double ecc = 0.0;
            Vec2 cpos = samples.pos[static_cast<std::size_t>(central)];
            for (int u = 0; u < samples.size(); ++u)
                ecc = std::max(ecc, dist(cpos, samples.pos[static_cast<std::size_t>(u)]));
            int steps0 = std::max(1, static_cast<int>(std::ceil(1.0 / eta)) - 1);
            double rmax0 = 1.0 + steps0 * eta * eta;
            if (ecc < rmax0) {
                net.sample.push_back(central);
                net.radius.resize(1);
                net.cover_m.resize(1);
                // smallest admissible covering radius
                double r0 = rmax0;
                for (int i = 1; i <= steps0; ++i) {
                    double r = 1.0 + i * eta * eta;
                    if (ecc < r) {
                        r0 = r;
                        break;
                    }
                }
                net.radius[0] = r0;
                net.cover_m[0] = 0;
                net.parent.assign(1, -1);
                net.order.assign(1, 0);
                nets.push_back(std::move(net));
                continue;
            }
            admit(central);
        }
        for (int u = 0; u < samples.size(); ++u) admit(u);
        int n = static_cast<int>(net.sample.size());
        net.radius.resize(static_cast<std::size_t>(n));
        net.cover_m.resize(static_cast<std::size_t>(n));
        parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t k = lo; k < hi; ++k) {
                RadiusChoice rc = choose_radius(
                    samples, samples.pos[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(k)])], j,
                    N, eta);
                net.radius[static_cast<std::size_t>(k)] = rc.radius;
                net.cover_m[static_cast<std::size_t>(k)] = rc.m;
            }
        });
        net.parent.assign(static_cast<std::size_t>(n), -1);
        net.order.resize(static_cast<std::size_t>(n));
        std::iota(net.order.begin(), net.order.end(), 0);
        nets.push_back(std::move(net));
    }
    return nets;
}

// ---------------------------------------------------------------------------
// Cube construction
// ---------------------------------------------------------------------------

Cube::Cube(const Cube& o)
    : id(o.id), net_index(o.net_index), x_net(o.x_net), scale(o.scale), lo(o.lo), hi(o.hi),
      parent(o.parent), children(o.children), anchor(o.anchor), clearance(o.clearance),
      diam(o.diam), hull(o.hull), ball(o.ball), ball_certified(o.ball_certified),
      ball_measure(o.ball_measure), dilate_cache(o.dilate_cache) {}

Cube& Cube::operator=(const Cube& o) {
    if (this == &o) return *this;
    id = o.id;
    net_index = o.net_index;
    x_net = o.x_net;
    scale = o.scale;
    lo = o.lo;
    hi = o.hi;
    parent = o.parent;
    children = o.children;
    anchor = o.anchor;
    clearance = o.clearance;
    diam = o.diam;
    hull = o.hull;
    ball = o.ball;
    ball_certified = o.ball_certified;
    ball_measure = o.ball_measure;
    dilate_cache = o.dilate_cache;
    return *this;
}

namespace {

// net-point owner of every sample at one level, by the ordered difference:
// the order-minimal net point whose chosen ball contains the sample
std::vector<int> assign_owners(const BoundarySampleSet& samples, const Net& net) {
    HashGrid grid;
    grid.cell = net.separation;
    for (int k = 0; k < static_cast<int>(net.sample.size()); ++k)
        grid.insert(samples.pos[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(k)])], k);
    double rmax = 0.0;
    for (double r : net.radius) rmax = std::max(rmax, r);
    std::vector<int> owner(static_cast<std::size_t>(samples.size()), -1);
    parallel_for(samples.size(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t u = lo; u < hi; ++u) {
            Vec2 p = samples.pos[static_cast<std::size_t>(u)];
            int best = -1;
            int best_order = std::numeric_limits<int>::max();
            grid.for_neighbors(p, rmax, [&](int k) {
                double r = net.radius[static_cast<std::size_t>(k)];
                Vec2 q = samples.pos[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(k)])];
                if (dist(p, q) < r && net.order[static_cast<std::size_t>(k)] < best_order) {
                    best_order = net.order[static_cast<std::size_t>(k)];
                    best = k;
                }
                return false;
            });
            owner[static_cast<std::size_t>(u)] = best;
        }
    });
    for (int u = 0; u < samples.size(); ++u)
        if (owner[static_cast<std::size_t>(u)] < 0)
            throw CertificationError("cube build: sample without a net owner (net not maximal?)");
    return owner;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    if (pts.size() < 3) return pts;
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

double hull_diameter(const std::vector<Vec2>& h) {
    double best = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t j = i + 1; j < h.size(); ++j) best = std::max(best, dist(h[i], h[j]));
    return best;
}

} // namespace

int CubeFamily::position_of_terminal(const Terminal& t) const {
    int s = samples.snap_terminal(t);
    return s < 0 ? -1 : rank[static_cast<std::size_t>(s)];
}

const std::vector<std::pair<int, int>>& CubeFamily::dilated_runs(const Cube& s,
                                                                 double radius) const {
    std::uint64_t key;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&key, &radius, sizeof(key));
    {
        std::lock_guard<std::mutex> lock(s.dilate_mutex);
        auto it = s.dilate_cache.find(key);
        if (it != s.dilate_cache.end()) return it->second;
    }
    // mini-grid over member positions, then scan candidates near the hull
    HashGrid member_grid;
    member_grid.cell = std::max(radius, 1e-300);
    for (int pos = s.lo; pos < s.hi; ++pos) {
        int u = tree_order[static_cast<std::size_t>(pos)];
        member_grid.insert(samples.pos[static_cast<std::size_t>(u)], u);
    }
    Box2 bb{{1e300, 1e300}, {-1e300, -1e300}};
    for (const Vec2& v : s.hull) {
        bb.lo.x = std::min(bb.lo.x, v.x);
        bb.lo.y = std::min(bb.lo.y, v.y);
        bb.hi.x = std::max(bb.hi.x, v.x);
        bb.hi.y = std::max(bb.hi.y, v.y);
    }
    Vec2 c = bb.center();
    double reach = Vec2{bb.width() * 0.5, bb.height() * 0.5}.norm() + radius;
    std::vector<std::pair<int, int>> cand;
    samples.candidates(c, reach, cand);
    std::vector<int> positions;
    positions.reserve(static_cast<std::size_t>(s.hi - s.lo));
    for (int p = s.lo; p < s.hi; ++p) positions.push_back(p);
    for (auto [ulo, uhi] : cand) {
        for (int u = ulo; u < uhi; ++u) {
            int pos = rank[static_cast<std::size_t>(u)];
            if (pos >= s.lo && pos < s.hi) continue;
            Vec2 p = samples.pos[static_cast<std::size_t>(u)];
            bool close = false;
            member_grid.for_neighbors(p, radius, [&](int member) {
                if (dist(p, samples.pos[static_cast<std::size_t>(member)]) <= radius) {
                    close = true;
                    return true;
                }
                return false;
            });
            if (close) positions.push_back(pos);
        }
    }
    std::sort(positions.begin(), positions.end());
    std::vector<std::pair<int, int>> runs;
    for (std::size_t i = 0; i < positions.size();) {
        std::size_t j = i + 1;
        while (j < positions.size() && positions[j] == positions[j - 1] + 1) ++j;
        runs.emplace_back(positions[i], positions[j - 1] + 1);
        i = j;
    }
    std::lock_guard<std::mutex> lock(s.dilate_mutex);
    auto [it, inserted] = s.dilate_cache.emplace(key, std::move(runs));
    (void)inserted;
    return it->second;
}

CubeFamily build_cubes(const Domain& dom, int N, double eta, int jmax, int depth,
                       double sample_spacing) {
    if (!(eta > 0 && eta < 1)) throw ParameterError("build_cubes: eta in (0,1)");
    if (depth < 1) throw ParameterError("build_cubes: depth >= 1");
    double twoN = std::ldexp(1.0, -N);
    if (!(eta * eta < 1.0 / 9.0) || twoN > 2.0 * eta * eta || twoN < 0.25 * eta * eta)
        throw ParameterError("build_cubes: need 2^-N ~ eta^2 < 1/9 (5.11)");

    CubeFamily fam;
    fam.dom = &dom;
    fam.N = N;
    fam.eta = eta;
    fam.jmax = jmax;
    fam.depth = depth;
    double spacing = sample_spacing > 0 ? sample_spacing : std::ldexp(1.0, -N * jmax) / 8.0;
    fam.samples = sample_boundary(dom, spacing);
    fam.nets = build_nets(fam.samples, N, jmax, eta);

    // levels in order: orders are parent-compatible, owners realize the
    // ordered differences Delta*_j
    fam.owner.resize(static_cast<std::size_t>(jmax) + 1);
    for (int j = 0; j <= jmax; ++j) {
        Net& net = fam.nets[static_cast<std::size_t>(j)];
        int n = static_cast<int>(net.sample.size());
        if (j > 0) {
            const std::vector<int>& prev_owner = fam.owner[static_cast<std::size_t>(j - 1)];
            const Net& prev = fam.nets[static_cast<std::size_t>(j - 1)];
            for (int k = 0; k < n; ++k)
                net.parent[static_cast<std::size_t>(k)] =
                    prev_owner[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(k)])];
            std::vector<int> idx(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                int pa = prev.order[static_cast<std::size_t>(net.parent[static_cast<std::size_t>(a)])];
                int pb = prev.order[static_cast<std::size_t>(net.parent[static_cast<std::size_t>(b)])];
                if (pa != pb) return pa < pb;
                return net.sample[static_cast<std::size_t>(a)] < net.sample[static_cast<std::size_t>(b)];
            });
            for (int r = 0; r < n; ++r) net.order[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])] = r;
        }
        fam.owner[static_cast<std::size_t>(j)] = assign_owners(fam.samples, net);
    }

    // tree order: sort samples by deepest owner's order, then sample index
    const Net& deep = fam.nets[static_cast<std::size_t>(jmax)];
    const std::vector<int>& deep_owner = fam.owner[static_cast<std::size_t>(jmax)];
    fam.tree_order.resize(static_cast<std::size_t>(fam.samples.size()));
    std::iota(fam.tree_order.begin(), fam.tree_order.end(), 0);
    std::sort(fam.tree_order.begin(), fam.tree_order.end(), [&](int a, int b) {
        int oa = deep.order[static_cast<std::size_t>(deep_owner[static_cast<std::size_t>(a)])];
        int ob = deep.order[static_cast<std::size_t>(deep_owner[static_cast<std::size_t>(b)])];
        if (oa != ob) return oa < ob;
        return a < b;
    });
    fam.rank.resize(fam.tree_order.size());
    for (int pos = 0; pos < static_cast<int>(fam.tree_order.size()); ++pos)
        fam.rank[static_cast<std::size_t>(fam.tree_order[static_cast<std::size_t>(pos)])] = pos;

    // lift tables: deepest net index -> ancestor net index per level
    std::vector<std::vector<int>> lift(static_cast<std::size_t>(jmax) + 1);
    lift[static_cast<std::size_t>(jmax)].resize(deep.sample.size());
    std::iota(lift[static_cast<std::size_t>(jmax)].begin(), lift[static_cast<std::size_t>(jmax)].end(), 0);
    for (int j = jmax - 1; j >= 0; --j) {
        const Net& child = fam.nets[static_cast<std::size_t>(j + 1)];
        lift[static_cast<std::size_t>(j)].resize(deep.sample.size());
        for (std::size_t k = 0; k < deep.sample.size(); ++k) {
            int at = lift[static_cast<std::size_t>(j + 1)][k];
            lift[static_cast<std::size_t>(j)][k] = child.parent[static_cast<std::size_t>(at)];
        }
    }

    // cubes per level: contiguous runs of the lifted deep owner
    fam.levels.assign(static_cast<std::size_t>(jmax) + 1, {});
    int nsamples = fam.samples.size();
    for (int j = 0; j <= jmax; ++j) {
        auto& level = fam.levels[static_cast<std::size_t>(j)];
        const Net& net = fam.nets[static_cast<std::size_t>(j)];
        int pos = 0;
        while (pos < nsamples) {
            int u = fam.tree_order[static_cast<std::size_t>(pos)];
            int at = lift[static_cast<std::size_t>(j)]
                         [static_cast<std::size_t>(deep_owner[static_cast<std::size_t>(u)])];
            int end = pos + 1;
            while (end < nsamples) {
                int v = fam.tree_order[static_cast<std::size_t>(end)];
                if (lift[static_cast<std::size_t>(j)]
                        [static_cast<std::size_t>(deep_owner[static_cast<std::size_t>(v)])] != at)
                    break;
                ++end;
            }
            Cube c;
            c.id = {j, static_cast<int>(level.size())};
            c.net_index = at;
            c.x_net = fam.samples.pos[static_cast<std::size_t>(net.sample[static_cast<std::size_t>(at)])];
            c.scale = std::ldexp(1.0, -N * j);
            c.lo = pos;
            c.hi = end;
            level.push_back(std::move(c));
            pos = end;
        }
    }

    // parent/child links by range containment
    for (int j = 1; j <= jmax; ++j) {
        auto& level = fam.levels[static_cast<std::size_t>(j)];
        auto& up = fam.levels[static_cast<std::size_t>(j - 1)];
        std::size_t pi = 0;
        for (Cube& c : level) {
            while (pi < up.size() && up[pi].hi <= c.lo) ++pi;
            c.parent = up[pi].id;
            up[pi].children.push_back(c.id);
        }
    }

    // anchors, hulls, diameters
    for (int j = 0; j <= jmax; ++j) {
        auto& level = fam.levels[static_cast<std::size_t>(j)];
        parallel_for(static_cast<std::int64_t>(level.size()), [&](std::int64_t lo, std::int64_t hi) {
            std::vector<std::pair<int, int>> cand;
            for (std::int64_t ci = lo; ci < hi; ++ci) {
                Cube& c = level[static_cast<std::size_t>(ci)];
                std::vector<Vec2> pts;
                pts.reserve(static_cast<std::size_t>(c.hi - c.lo));
                for (int p = c.lo; p < c.hi; ++p)
                    pts.push_back(fam.samples.pos[static_cast<std::size_t>(
                        fam.tree_order[static_cast<std::size_t>(p)])]);
                c.hull = convex_hull(pts);
                c.diam = hull_diameter(c.hull);
                // anchor: candidate member maximizing clearance to non-members
                double cap = 0.55 * c.scale;
                int m = c.hi - c.lo;
                int ncand = std::min(m, 24);
                double best = -1.0;
                for (int t = 0; t < ncand; ++t) {
                    int p = c.lo + static_cast<int>((static_cast<std::int64_t>(t) * m + m / 2) / ncand);
                    int u = fam.tree_order[static_cast<std::size_t>(p)];
                    Vec2 q = fam.samples.pos[static_cast<std::size_t>(u)];
                    fam.samples.candidates(q, cap, cand);
                    double clearance = cap;
                    bool aborted = false;
                    for (auto [vlo, vhi] : cand) {
                        for (int v = vlo; v < vhi; ++v) {
                            int vpos = fam.rank[static_cast<std::size_t>(v)];
                            if (vpos >= c.lo && vpos < c.hi) continue;
                            double d = dist(q, fam.samples.pos[static_cast<std::size_t>(v)]);
                            if (d < clearance) {
                                clearance = d;
                                if (clearance <= best) {
                                    aborted = true;
                                    break;
                                }
                            }
                        }
                        if (aborted) break;
                    }
                    if (!aborted && clearance > best) {
                        best = clearance;
                        c.anchor = q;
                        c.clearance = clearance;
                    }
                }
            }
        });
    }
    fam.ledger.set("eta-net", eta, ConstantsLedger::Provenance::Fixed);
    fam.ledger.set("N", N, ConstantsLedger::Provenance::Fixed);
    fam.ledger.set("c0", fam.c0, ConstantsLedger::Provenance::Fixed);
    int worst_m = 0;
    for (const Net& net : fam.nets)
        for (int m : net.cover_m) worst_m = std::max(worst_m, m);
    fam.ledger.set("Cd-cover", worst_m * std::pow(eta, 2.0 * dom.params.d - 1.0),
                   ConstantsLedger::Provenance::Measured, {"eta-net"});
    return fam;
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

FamilyAudit audit_family(const CubeFamily& fam) {
    FamilyAudit a;
    a.partition_ok = true;
    a.nesting_ok = true;
    a.diam_ok = true;
    a.anchor_ok = true;
    int n = fam.samples.size();
    for (int j = 0; j <= fam.jmax; ++j) {
        const auto& level = fam.levels[static_cast<std::size_t>(j)];
        int covered = 0;
        int prev_hi = 0;
        for (const Cube& c : level) {
            covered += c.hi - c.lo;
            if (c.lo != prev_hi) a.partition_ok = false;
            prev_hi = c.hi;
            if (j > 0) {
                const Cube& p = fam.cube(c.parent);
                if (!(p.lo <= c.lo && c.hi <= p.hi)) {
                    a.nesting_ok = false;
                    if (a.first_failure.empty()) a.first_failure = "nesting violated";
                }
            }
            double rlo = c.diam / c.scale;
            a.worst_diam_lo = std::min(a.worst_diam_lo, rlo);
            a.worst_diam_hi = std::max(a.worst_diam_hi, rlo);
            if (c.diam < c.scale / 3.0 || c.diam > 4.0 * (1.0 + fam.eta) * c.scale) {
                a.diam_ok = false;
                if (a.first_failure.empty()) {
                    std::ostringstream os;
                    os << "diam ratio " << rlo << " outside [1/3, 4(1+eta)] at level " << j
                       << " index " << c.id.index;
                    a.first_failure = os.str();
                }
            }
            a.worst_clearance = std::min(a.worst_clearance, c.clearance / c.scale);
            if (c.clearance < fam.c0 * c.scale) {
                a.anchor_ok = false;
                if (a.first_failure.empty()) {
                    std::ostringstream os;
                    os << "anchor clearance " << c.clearance / c.scale << " < c0 at level " << j
                       << " index " << c.id.index;
                    a.first_failure = os.str();
                }
            }
        }
        if (covered != n || prev_hi != n) {
            a.partition_ok = false;
            if (a.first_failure.empty()) a.first_failure = "partition incomplete";
        }
    }
    return a;
}

HausdorffAudit audit_hausdorff(const CubeFamily& fam) {
    HausdorffAudit audit;
    int n = fam.samples.size();
    auto lift_to = [&](int from_level, int net_idx, int to_level) {
        int at = net_idx;
        for (int j = from_level; j > to_level; --j)
            at = fam.nets[static_cast<std::size_t>(j)].parent[static_cast<std::size_t>(at)];
        return at;
    };
    std::vector<std::pair<int, int>> cand;
    for (int j = 0; j <= fam.jmax; ++j) {
        int max_m = std::min(fam.depth, fam.jmax - j);
        for (int m = 0; m + 1 <= max_m; ++m) {
            double bound = (1.0 + fam.eta) * std::ldexp(1.0, -fam.N * (j + m));
            const std::vector<int>& oa = fam.owner[static_cast<std::size_t>(j + m)];
            const std::vector<int>& ob = fam.owner[static_cast<std::size_t>(j + m + 1)];
            ++audit.pairs_checked;
            // Hausdorff control per cube x: a sample u in D_{j,m}(x) that is
            // not in D_{j,m+1}(x) needs a D_{j,m+1}(x) partner within the
            // bound, and symmetrically. Find, for each moved sample, a
            // partner in the other iterate of BOTH cubes involved.
            auto find_partner = [&](int u, Vec2 p, const std::vector<int>& owner_arr,
                                    int owner_level, int want_cube, double* best) {
                fam.samples.candidates(p, bound, cand);
                for (auto [vlo, vhi] : cand) {
                    for (int v = vlo; v < vhi; ++v) {
                        if (v == u) continue;
                        if (lift_to(owner_level, owner_arr[static_cast<std::size_t>(v)], j) !=
                            want_cube)
                            continue;
                        double d = dist(p, fam.samples.pos[static_cast<std::size_t>(v)]);
                        if (d <= bound) {
                            *best = std::min(*best, d);
                            return true;
                        }
                    }
                }
                return false;
            };
            for (int u = 0; u < n; ++u) {
                int ca = lift_to(j + m, oa[static_cast<std::size_t>(u)], j);
                int cb = lift_to(j + m + 1, ob[static_cast<std::size_t>(u)], j);
                if (ca == cb) continue;
                Vec2 p = fam.samples.pos[static_cast<std::size_t>(u)];
                double best = 1e300;
                // u in D_{j,m}(ca) \ D_{j,m+1}(ca): partner in D_{j,m+1}(ca)
                bool ok_a = find_partner(u, p, ob, j + m + 1, ca, &best);
                // u in D_{j,m+1}(cb) \ D_{j,m}(cb): partner in D_{j,m}(cb)
                bool ok_b = find_partner(u, p, oa, j + m, cb, &best);
                if (!ok_a || !ok_b) {
                    ++audit.violations;
                    if (audit.first_failure.empty()) {
                        std::ostringstream os;
                        os << "(5.7) fail at level " << j << " iterate " << m << " sample " << u;
                        audit.first_failure = os.str();
                    }
                } else {
                    audit.worst_ratio = std::max(audit.worst_ratio, best / bound);
                }
            }
        }
    }
    return audit;
}

std::vector<SmallBoundaryStat> small_boundary_stats(const CubeFamily& fam, const Cube& s,
                                                    const std::vector<double>& taus) {
    std::vector<SmallBoundaryStat> out;
    std::vector<std::pair<int, int>> cand;
    for (double tau : taus) {
        double w = tau * s.scale;
        // collect collar samples: members near a foreign sample, foreigners
        // near a member (within w)
        Box2 bb{{1e300, 1e300}, {-1e300, -1e300}};
        for (const Vec2& v : s.hull) {
            bb.lo.x = std::min(bb.lo.x, v.x);
            bb.lo.y = std::min(bb.lo.y, v.y);
            bb.hi.x = std::max(bb.hi.x, v.x);
            bb.hi.y = std::max(bb.hi.y, v.y);
        }
        Vec2 c = bb.center();
        double reach = Vec2{bb.width() * 0.5, bb.height() * 0.5}.norm() + w;
        fam.samples.candidates(c, reach, cand);
        std::set<std::pair<std::int64_t, std::int64_t>> cells;
        std::vector<std::pair<int, int>> local;
        for (auto [vlo, vhi] : cand) {
            for (int v = vlo; v < vhi; ++v) {
                Vec2 p = fam.samples.pos[static_cast<std::size_t>(v)];
                bool inside = fam.member(s, fam.rank[static_cast<std::size_t>(v)]);
                // nearest sample on the other side within w?
                fam.samples.candidates(p, w, local);
                bool hit = false;
                for (auto [wlo, whi] : local) {
                    for (int q = wlo; q < whi; ++q) {
                        if (fam.member(s, fam.rank[static_cast<std::size_t>(q)]) == inside) continue;
                        if (dist(p, fam.samples.pos[static_cast<std::size_t>(q)]) < w) {
                            hit = true;
                            break;
                        }
                    }
                    if (hit) break;
                }
                if (hit)
                    cells.insert({static_cast<std::int64_t>(std::floor(p.x / w)),
                                  static_cast<std::int64_t>(std::floor(p.y / w))});
            }
        }
        out.push_back({tau, static_cast<std::int64_t>(cells.size())});
    }
    return out;
}

double small_boundary_fit(const std::vector<SmallBoundaryStat>& stats, int d) {
    // smallest C >= 2 with N_tau <= C tau^{1/C - d} for all scanned taus
    double lo = 2.0, hi = 2.0;
    auto ok = [&](double C) {
        for (const auto& st : stats)
            if (static_cast<double>(st.n_tau) > C * std::pow(st.tau, 1.0 / C - d) + 1e-9)
                return false;
        return true;
    };
    while (!ok(hi) && hi < 1e9) hi *= 2.0;
    if (hi >= 1e9) return hi;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Corkscrew balls
// ---------------------------------------------------------------------------

double certify_ball(const CubeFamily& fam, const Cube& s, double eps, std::int64_t samples,
                    std::uint64_t seed, double shell_factor) {
    const Domain& dom = *fam.dom;
    double r0 = fam.c0 * s.scale;
    Ball cap{s.anchor, r0};
    double shell = shell_factor * r0;
    Vec2 stencil[5] = {s.ball.center,
                       s.ball.center + Vec2{s.ball.radius, 0.0},
                       s.ball.center - Vec2{s.ball.radius, 0.0},
                       s.ball.center + Vec2{0.0, s.ball.radius},
                       s.ball.center - Vec2{0.0, s.ball.radius}};
    double worst = 1.0;
    for (int i = 0; i < 5; ++i) {
        auto terms = wos_terminals_in_ball(dom, cap, stencil[i], shell, samples,
                                           seed + static_cast<std::uint64_t>(i) * 7919,
                                           stream::kAudit);
        std::int64_t in = 0;
        for (const Terminal& t : terms) {
            if (t.capped || t.piece < 0) continue;
            int p = fam.position_of_terminal(t);
            if (p >= 0 && fam.member(s, p) && dist(t.point, s.anchor) <= r0) ++in;
        }
        double v = static_cast<double>(in) / static_cast<double>(terms.size());
        double se = std::sqrt(std::max(0.0, v * (1.0 - v) / static_cast<double>(terms.size())));
        worst = std::min(worst, v + 3.0 * se);  // upper confidence, compare to 1-eps
        (void)eps;
    }
    return worst;
}

namespace {
// Largest interior ball near x with radius capped at `cap` and center kept
// shallow: score favors pockets of size ~cap close to the boundary, which
// is what the (1.18)-style measure estimate needs.
Ball capped_ball_search(const Domain& dom, Vec2 x, double window_r, double cap) {
    auto score = [&](Vec2 p) {
        double slack = window_r - dist(p, x);
        if (slack <= 0 || !dom.contains(p)) return std::pair<double, double>{-1.0, 0.0};
        double sd = dom.distance(p);
        double r = std::min({sd, slack, cap});
        return std::pair<double, double>{r - 0.5 * std::max(0.0, sd - cap), r};
    };
    Vec2 best_p = x;
    double best_s = -1.0, best_r = 0.0;
    auto consider = [&](Vec2 p) {
        auto [s, r] = score(p);
        if (s > best_s) {
            best_s = s;
            best_r = r;
            best_p = p;
        }
    };
    // rays from x at geometric depths, plus a coarse grid
    for (int k = 0; k < 24; ++k) {
        double ang = k * 0.2617993877991494;  // pi/12
        Vec2 dir{std::cos(ang), std::sin(ang)};
        double t = 1.2 * cap;
        while (t < window_r) {
            consider(x + dir * t);
            t *= 1.4;
        }
    }
    const int n = 9;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            consider({x.x - window_r + 2.0 * window_r * i / n,
                      x.y - window_r + 2.0 * window_r * j / n});
    // local refinement around the best candidate
    for (int pass = 0; pass < 2; ++pass) {
        double span = cap * (pass == 0 ? 2.0 : 0.6);
        Vec2 at = best_p;
        for (int i = -3; i <= 3; ++i)
            for (int j = -3; j <= 3; ++j)
                consider({at.x + span * i / 3.0, at.y + span * j / 3.0});
    }
    return {best_p, best_r};
}
} // namespace

void attach_corkscrew_balls(CubeFamily& fam, const BallAttachOptions& opt) {
    if (!(opt.eps > 0 && opt.eps < 0.5))
        throw PreconditionError("attach_corkscrew_balls: eps in (0, 1/2)");
    const Domain& dom = *fam.dom;
    // Depth cap: default targets c3 ~ 1.5 * 2^{-N-1} c0 (paper range at this
    // N); deep mode targets the escape budget of the requested eps.
    double cap_factor = opt.deep_balls ? 0.3 * opt.eps * fam.c0
                                       : 6.0 * fam.c0 * std::ldexp(1.0, -fam.N - 1);
    cap_factor = std::min(cap_factor, fam.c0 * 0.5 * 0.999);
    double min_ratio = 1e300;
    for (int j = 0; j <= fam.jmax; ++j) {
        auto& level = fam.levels[static_cast<std::size_t>(j)];
        parallel_for(static_cast<std::int64_t>(level.size()), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t ci = lo; ci < hi; ++ci) {
                Cube& c = level[static_cast<std::size_t>(ci)];
                c.ball = capped_ball_search(dom, c.anchor, 0.5 * fam.c0 * c.scale,
                                            cap_factor * c.scale);
            }
        });
        for (Cube& c : level) min_ratio = std::min(min_ratio, c.ball.radius / (4.0 * c.scale));
    }
    double c3_hi = fam.c0 / 4.0 * 0.999;
    double c3_lo = fam.c0 * std::ldexp(1.0, -fam.N - 1);
    double c3 = std::min(min_ratio, c3_hi);
    if (!(c3 > 0))
        throw CertificationError("attach_corkscrew_balls: no interior ball found");
    if (c3 <= c3_lo) {
        if (!opt.deep_balls)
            throw CertificationError(
                "attach_corkscrew_balls: family c3 below the (1.16) floor: " +
                std::to_string(c3) + " <= " + std::to_string(c3_lo));
        ++fam.range_violations_1_16;
    }
    fam.c3 = c3;
    fam.ledger.set("c3", c3, ConstantsLedger::Provenance::Measured, {"c0"});
    for (auto& level : fam.levels)
        for (Cube& c : level) {
            c.ball.radius = c3 * c.scale;
            // (1.17): 4B_S inside Omega and B(x_S, c0 ell / 2)
            if (dom.distance(c.ball.center) < 4.0 * c3 * c.scale * (1.0 - 1e-9))
                throw CertificationError("(1.17) violated: 4B_S not inside Omega at level " +
                                         std::to_string(c.id.level) + " index " +
                                         std::to_string(c.id.index));
            if (dist(c.ball.center, c.anchor) + 4.0 * c3 * c.scale >
                0.5 * fam.c0 * c.scale * (1.0 + 1e-9))
                throw CertificationError("(1.17) violated: 4B_S not inside B(x_S, c0 ell/2)");
        }
    // (1.19): same-level balls pairwise disjoint
    for (auto& level : fam.levels) {
        std::vector<int> idx(level.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return level[static_cast<std::size_t>(a)].ball.center.x <
                   level[static_cast<std::size_t>(b)].ball.center.x;
        });
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const Cube& a = level[static_cast<std::size_t>(idx[i])];
            for (std::size_t k = i + 1; k < idx.size(); ++k) {
                const Cube& b = level[static_cast<std::size_t>(idx[k])];
                if (b.ball.center.x - a.ball.center.x > 2.0 * a.ball.radius) break;
                if (dist(a.ball.center, b.ball.center) < a.ball.radius + b.ball.radius)
                    throw CertificationError("(1.19) violated at level " +
                                             std::to_string(a.id.level));
            }
        }
    }
    // (1.20): explicit ancestor-chain check (the general case follows from
    // sd(p_S') >= 4 c3 ell' checked above and c3 > 2^{-N-1} c0)
    for (int j = 1; j <= fam.jmax; ++j) {
        for (const Cube& c : fam.levels[static_cast<std::size_t>(j)]) {
            CubeId up = c.parent;
            while (up.valid()) {
                const Cube& anc = fam.cube(up);
                if (dist(anc.ball.center, c.anchor) <
                    2.0 * anc.ball.radius + fam.c0 * c.scale - 1e-15) {
                    if (!opt.deep_balls)
                        throw CertificationError("(1.20) violated between levels " +
                                                 std::to_string(j) + " and " +
                                                 std::to_string(up.level));
                    ++fam.range_violations_1_20;
                }
                up = anc.parent;
            }
        }
    }
    // (1.18) certification on the audit subset
    if (opt.certify_per_level != 0) {
        for (auto& level : fam.levels) {
            std::int64_t n = static_cast<std::int64_t>(level.size());
            std::int64_t take = opt.certify_per_level < 0
                                    ? n
                                    : std::min<std::int64_t>(n, opt.certify_per_level);
            std::vector<std::int64_t> picks;
            for (std::int64_t t = 0; t < take; ++t)
                picks.push_back(take == n ? t : (t * n + n / 2) / take);
            std::atomic<bool> failed{false};
            std::string failure;
            std::mutex mu;
            parallel_for(static_cast<std::int64_t>(picks.size()),
                         [&](std::int64_t lo, std::int64_t hi) {
                             for (std::int64_t i = lo; i < hi; ++i) {
                                 if (failed.load()) return;
                                 Cube& c = level[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
                                 double v = certify_ball(fam, c, opt.eps, opt.samples,
                                                         opt.seed, opt.shell_factor);
                                 c.ball_measure = v;
                                 c.ball_certified = v >= 1.0 - opt.eps;
                                 if (!c.ball_certified) {
                                     std::lock_guard<std::mutex> lock(mu);
                                     failed = true;
                                     std::ostringstream os;
                                     os << "(1.18) certification failed at level " << c.id.level
                                        << " index " << c.id.index << ": measured " << v
                                        << " < " << 1.0 - opt.eps;
                                     failure = os.str();
                                 }
                             }
                         });
            if (failed) throw CertificationError(failure);
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string CubeFamily::to_json(bool with_members) const {
    nlohmann::json j;
    j["N"] = N;
    j["eta"] = eta;
    j["jmax"] = jmax;
    j["depth"] = depth;
    j["spacing"] = samples.spacing;
    j["samples"] = samples.size();
    j["c0"] = c0;
    j["c3"] = c3;
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& level : levels) {
        nlohmann::json jc = nlohmann::json::array();
        for (const Cube& c : level) {
            nlohmann::json e;
            e["index"] = c.id.index;
            e["net"] = c.net_index;
            e["lo"] = c.lo;
            e["hi"] = c.hi;
            e["scale"] = c.scale;
            e["diam"] = c.diam;
            e["anchor"] = {c.anchor.x, c.anchor.y};
            e["clearance"] = c.clearance;
            if (c.parent.valid()) e["parent"] = c.parent.index;
            if (c.ball.radius > 0)
                e["ball"] = {c.ball.center.x, c.ball.center.y, c.ball.radius};
            if (with_members) {
                nlohmann::json mem = nlohmann::json::array();
                for (int p = c.lo; p < c.hi; ++p) mem.push_back(tree_order[static_cast<std::size_t>(p)]);
                e["members"] = mem;
            }
            jc.push_back(e);
        }
        jl.push_back(jc);
    }
    j["levels"] = jl;
    return j.dump();
}

std::string family_to_svg(const CubeFamily& fam) {
    Box2 view{{-0.2, -0.2}, {1.2, 1.2}};
    SvgCanvas svg(view);
    svg.draw_domain(*fam.dom);
    const char* colors[5] = {"#dd3333", "#dd8833", "#33aa33", "#3366dd", "#9933cc"};
    for (int j = 0; j <= fam.jmax && j < 5; ++j) {
        for (const Cube& c : fam.levels[static_cast<std::size_t>(j)]) {
            if (c.hull.size() >= 2) {
                std::vector<Vec2> loop = c.hull;
                loop.push_back(loop.front());
                svg.polyline(loop, colors[j], 0.6);
            }
            svg.dot(c.anchor, 1.5, colors[j]);
        }
    }
    return svg.finish();
}

} // namespace hmlab
