#include "hmlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

std::string MeasureEstimate::to_json() const {
    nlohmann::json j;
    j["value"] = value;
    j["stderr"] = stderr_;
    j["samples"] = samples;
    j["shell"] = shell;
    j["seed"] = seed;
    if (capped_paths > 0) j["capped_paths"] = capped_paths;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Walks
// ---------------------------------------------------------------------------

Terminal walk_once(const Domain& dom, Vec2 start, double shell, CounterRng& rng) {
    Vec2 p = start;
    for (std::int64_t step = 0; step < kMaxWalkSteps; ++step) {
        double d = dom.distance(p);
        if (d < shell) {
            NearestHit hit = dom.nearest(p);
            Terminal t;
            t.piece = hit.piece;
            t.point = hit.point;
            t.arc = static_cast<float>(
                dom.pieces[static_cast<std::size_t>(hit.piece)].nearest_arc(p));
            return t;
        }
        double a = rng.angle();
        p += Vec2{std::cos(a), std::sin(a)} * d;
    }
    Terminal t;
    t.capped = true;
    t.point = p;
    return t;
}

Terminal walk_once_in_ball(const Domain& dom, const Ball& cap, Vec2 start, double shell,
                           CounterRng& rng) {
    Vec2 p = start;
    for (std::int64_t step = 0; step < kMaxWalkSteps; ++step) {
        double slack = cap.radius - dist(p, cap.center);
        double d = dom.distance(p);
        double dd = std::min(d, slack);
        if (dd < shell) {
            Terminal t;
            if (slack < d) {
                t.piece = kSpherePiece;
                Vec2 dir = (p - cap.center);
                double n = dir.norm();
                t.point = n > 0 ? cap.center + dir * (cap.radius / n)
                                : cap.center + Vec2{cap.radius, 0.0};
            } else {
                NearestHit hit = dom.nearest(p);
                t.piece = hit.piece;
                t.point = hit.point;
                t.arc = static_cast<float>(
                    dom.pieces[static_cast<std::size_t>(hit.piece)].nearest_arc(p));
            }
            return t;
        }
        double a = rng.angle();
        p += Vec2{std::cos(a), std::sin(a)} * dd;
    }
    Terminal t;
    t.capped = true;
    t.point = p;
    return t;
}

std::vector<Terminal> wos_terminals(const Domain& dom, Vec2 p, double shell,
                                    std::int64_t samples, std::uint64_t seed,
                                    std::uint64_t stream_id) {
    if (!dom.contains(p)) throw PreconditionError("wos: start point not in Omega");
    if (!(shell > 0) || shell > dom.distance(p))
        throw PreconditionError("wos: need 0 < shell <= dist(p, boundary)");
    std::vector<Terminal> out(static_cast<std::size_t>(samples));
    CounterRng base(seed, stream_id);
    parallel_for(samples, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            CounterRng rng = base.split(static_cast<std::uint64_t>(i));
            out[static_cast<std::size_t>(i)] = walk_once(dom, p, shell, rng);
        }
    });
    return out;
}

std::vector<Terminal> wos_terminals_in_ball(const Domain& dom, const Ball& cap, Vec2 p,
                                            double shell, std::int64_t samples,
                                            std::uint64_t seed, std::uint64_t stream_id) {
    if (!dom.contains(p) || !cap.contains(p))
        throw PreconditionError("wos_in_ball: start point not in Omega and the cap ball");
    std::vector<Terminal> out(static_cast<std::size_t>(samples));
    CounterRng base(seed, stream_id);
    parallel_for(samples, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            CounterRng rng = base.split(static_cast<std::uint64_t>(i));
            out[static_cast<std::size_t>(i)] = walk_once_in_ball(dom, cap, p, shell, rng);
        }
    });
    return out;
}

namespace {
MeasureEstimate tally(const Domain& dom, const std::vector<Terminal>& terms,
                      const BoundaryRegion& E, double shell, std::uint64_t seed) {
    std::int64_t in = 0, capped = 0;
    for (const Terminal& t : terms) {
        if (t.capped) {
            ++capped;
            continue;
        }
        if (t.piece >= 0 && E.contains(dom, t.piece, t.point)) ++in;
    }
    MeasureEstimate e;
    e.samples = static_cast<std::int64_t>(terms.size());
    e.value = static_cast<double>(in) / static_cast<double>(e.samples);
    e.stderr_ = std::sqrt(std::max(0.0, e.value * (1.0 - e.value) /
                                            static_cast<double>(e.samples)));
    e.shell = shell;
    e.seed = seed;
    e.capped_paths = capped;
    return e;
}
} // namespace

MeasureEstimate wos_measure(const Domain& dom, Vec2 p, const BoundaryRegion& E, double shell,
                            std::int64_t samples, std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("wos: samples >= 1 required");
    auto terms = wos_terminals(dom, p, shell, samples, seed);
    return tally(dom, terms, E, shell, seed);
}

MeasureEstimate wos_measure_in_ball(const Domain& dom, const Ball& cap, Vec2 p,
                                    const BoundaryRegion& E, double shell,
                                    std::int64_t samples, std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("wos: samples >= 1 required");
    auto terms = wos_terminals_in_ball(dom, cap, p, shell, samples, seed);
    return tally(dom, terms, E, shell, seed);
}

double poisson_halfplane(Vec2 p, double a, double b) {
    if (!(p.y > 0)) throw PreconditionError("poisson_halfplane: p must satisfy y > 0");
    if (!(a < b)) throw PreconditionError("poisson_halfplane: need a < b");
    double t1 = std::atan2(p.y, p.x - b);
    double t0 = std::atan2(p.y, p.x - a);
    return (t1 - t0) / kPi;
}

// ---------------------------------------------------------------------------
// Equilibrium measure
// ---------------------------------------------------------------------------

double EquilibriumData::potential(Vec2 p) const {
    double u = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        u -= weights[i] * std::log(dist(p, nodes[i]));
    return u;
}

Vec2 EquilibriumData::potential_gradient(Vec2 p) const {
    Vec2 g{0.0, 0.0};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Vec2 r = p - nodes[i];
        g -= r * (weights[i] / r.norm2());
    }
    return g;
}

EquilibriumData equilibrium_measure_points(const std::vector<Vec2>& pts,
                                           const std::vector<double>& spacing) {
    int n = static_cast<int>(pts.size());
    if (n < 2) throw SolverError("equilibrium: need at least 2 nodes");
    // [ K  -1 ] [q    ]   [0]
    // [ 1'  0 ] [gamma] = [1],  K_ij = -log|x_i - x_j|, K_ii = -log(s_i/2)
    Eigen::MatrixXd M(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                M(i, i) = -std::log(spacing[static_cast<std::size_t>(i)] * 0.5);
            } else {
                double d = dist(pts[static_cast<std::size_t>(i)],
                                pts[static_cast<std::size_t>(j)]);
                if (d <= 0) throw SolverError("equilibrium: coincident nodes");
                M(i, j) = -std::log(d);
            }
        }
        M(i, n) = -1.0;
        M(n, i) = 1.0;
    }
    M(n, n) = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd sol = lu.solve(rhs);
    // one step of iterative refinement to push the potential residual down
    Eigen::VectorXd r = rhs - M * sol;
    sol += lu.solve(r);
    if (!sol.allFinite()) throw SolverError("equilibrium: singular system");

    EquilibriumData eq;
    eq.nodes = pts;
    eq.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eq.weights[static_cast<std::size_t>(i)] = sol(i);
    eq.robin = sol(n);
    eq.capacity = std::exp(-eq.robin);
    double umin = 1e300, umax = -1e300;
    for (int i = 0; i < n; ++i) {
        double u = M.row(i).head(n).dot(sol.head(n));
        umin = std::min(umin, u);
        umax = std::max(umax, u);
    }
    eq.residual = umax - umin;
    return eq;
}

EquilibriumData equilibrium_measure(const Domain& dom, const BoundaryRegion& region,
                                    int nodes) {
    if (region.empty()) throw PreconditionError("equilibrium: empty region");
    if (nodes < 8) throw PreconditionError("equilibrium: nodes >= 8 required");
    double total_len = 0.0;
    for (int pi : region.piece_ids)
        total_len += dom.pieces[static_cast<std::size_t>(pi)].length();
    if (total_len <= 0) throw SolverError("equilibrium: degenerate region (zero length)");
    std::vector<Vec2> pts;
    std::vector<double> spacing;
    pts.reserve(static_cast<std::size_t>(nodes));
    for (int pi : region.piece_ids) {
        const Piece& p = dom.pieces[static_cast<std::size_t>(pi)];
        double len = p.length();
        int m = std::max(1, static_cast<int>(std::llround(nodes * len / total_len)));
        double s = len / m;
        for (int k = 0; k < m; ++k) {
            pts.push_back(p.point_at((k + 0.5) * s));
            spacing.push_back(s);
        }
    }
    return equilibrium_measure_points(pts, spacing);
}

// ---------------------------------------------------------------------------
// Riesz potentials
// ---------------------------------------------------------------------------

RieszResult riesz_potential(const std::vector<std::pair<PointN, double>>& mu_nodes,
                            const PointN& p, int d) {
    if (d < 2) throw PreconditionError("riesz_potential: d >= 2 required");
    RieszResult r;
    r.gradient.assign(p.size(), 0.0);
    for (const auto& [y, w] : mu_nodes) {
        double dd = distN(p, y);
        if (dd <= 0) throw SolverError("riesz_potential: p coincides with a node");
        r.value += w * std::pow(dd, 1 - d);
        // (3.16): grad = (1-d) sum w (p-y)/|p-y|^{d+1}
        double scale = (1 - d) * w * std::pow(dd, -(d + 1));
        for (std::size_t i = 0; i < p.size(); ++i) r.gradient[i] += scale * (p[i] - y[i]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Test functions (planar Case II)
// ---------------------------------------------------------------------------

double TestFunction::f_value(const Domain& dom, int piece, Vec2 point) const {
    if (piece < 0) return 0.0;
    if (!support.contains(dom, piece, point)) return 0.0;
    double v = plus.potential(point) - minus.potential(point);
    double f = 0.5 * (1.0 + v / norm);
    return std::clamp(f, 0.0, 1.0);
}

std::pair<double, double> TestFunction::u_value(const Domain& dom, Vec2 p,
                                                const TestFunctionBudget& budget) const {
    auto terms = wos_terminals(dom, p, budget.shell, budget.samples, budget.seed,
                               stream::kTestFunction);
    double sum = 0.0, sum2 = 0.0;
    for (const Terminal& t : terms) {
        double f = t.capped ? 0.0 : f_value(dom, t.piece, t.point);
        sum += f;
        sum2 += f * f;
    }
    double n = static_cast<double>(terms.size());
    double mean = sum / n;
    double var = std::max(0.0, sum2 / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

TestFunction build_test_function(const Domain& dom, Vec2 x, double r, const Ball& bs,
                                 const BoundaryRegion& cube_region, double eps,
                                 const TestFunctionBudget& budget) {
    if (!(eps > 0 && eps < 0.5)) throw PreconditionError("test function: eps in (0, 1/2)");
    // E_S: region clipped to B(x, r)
    BoundaryRegion es = cube_region;
    es.clip = Ball{x, r};

    // Split E_S into near/far compacta around p_S: F+ within rho_plus of
    // p_S, F- beyond rho_minus. The radii scale with the ball's boundary
    // distance (the ball must hug the boundary, as in the c1/c2 balls of
    // the planar construction): the near compactum is then the one-sided
    // wall closest to p_S and the far one keeps a gradient direction.
    double ds = dist(bs.center, dom.nearest(bs.center).point);
    double rho_plus = std::max(2.5 * ds, 1.05 * bs.radius);
    double rho_minus = 2.0 * rho_plus;

    auto collect = [&](bool near) {
        std::vector<Vec2> pts;
        std::vector<double> spacing;
        for (int pi : es.piece_ids) {
            const Piece& pc = dom.pieces[static_cast<std::size_t>(pi)];
            double len = pc.length();
            int m = std::max(1, static_cast<int>(std::ceil(len / (r / 256.0))));
            double s = len / m;
            for (int k = 0; k < m; ++k) {
                Vec2 q = pc.point_at((k + 0.5) * s);
                if (dist(q, x) > r) continue;
                double dq = dist(q, bs.center);
                if (near ? (dq <= rho_plus) : (dq >= rho_minus)) {
                    pts.push_back(q);
                    spacing.push_back(s);
                }
            }
        }
        return std::make_pair(pts, spacing);
    };

    auto [pp, sp] = collect(true);
    auto [pm, sm] = collect(false);
    if (pp.size() < 4 || pm.size() < 4)
        throw CertificationError("test function: could not separate F+ / F- inside the cube");
    // subsample to keep the dense solve tractable
    auto thin = [](std::vector<Vec2>& pts, std::vector<double>& spc, std::size_t cap) {
        if (pts.size() <= cap) return;
        std::size_t stride = (pts.size() + cap - 1) / cap;
        std::vector<Vec2> p2;
        std::vector<double> s2;
        for (std::size_t i = 0; i < pts.size(); i += stride) {
            p2.push_back(pts[i]);
            s2.push_back(spc[i] * static_cast<double>(stride));
        }
        pts.swap(p2);
        spc.swap(s2);
    };
    thin(pp, sp, 400);
    thin(pm, sm, 400);

    TestFunction tf;
    tf.kind = TestFunction::Kind::LogCaseII;
    tf.support = es;
    tf.ball = bs;
    tf.clip = es.clip;
    tf.plus = equilibrium_measure_points(pp, sp);
    tf.minus = equilibrium_measure_points(pm, sm);

    // f = clamp((1 + (U+ - U-)/norm)/2): the normalizer is the O(1) scale
    // separating the compacta, so f saturates at 1 near F+ and 0 near F-
    // instead of being crushed by the Robin-constant spikes at the nodes.
    tf.norm = std::log(4.0 * rho_minus / rho_plus);

    // direction of steepest change of U+ - U- at the ball center
    Vec2 g = tf.plus.potential_gradient(bs.center) - tf.minus.potential_gradient(bs.center);
    tf.direction = g.norm() > 0 ? g.normalized() : Vec2{1.0, 0.0};

    // certify (3.9): inf over a 5-point stencil of B_S of u - 3 sigma
    Vec2 stencil[5] = {bs.center,
                       bs.center + Vec2{0.5 * bs.radius, 0.0},
                       bs.center - Vec2{0.5 * bs.radius, 0.0},
                       bs.center + Vec2{0.0, 0.5 * bs.radius},
                       bs.center - Vec2{0.0, 0.5 * bs.radius}};
    double c9 = 1e300;
    for (int i = 0; i < 5; ++i) {
        TestFunctionBudget b = budget;
        b.seed = budget.seed + static_cast<std::uint64_t>(i) + 1;
        auto [u, se] = tf.u_value(dom, stencil[i], b);
        c9 = std::min(c9, u - 3.0 * se);
    }
    if (c9 <= 0)
        throw CertificationError("test function: measured inf u over B_S is not positive (c9 = " +
                                 std::to_string(c9) + ")");
    tf.c9 = c9;

    // certify (3.10): |du/de| at the center via paired central differences
    double h = 0.4 * bs.radius;
    TestFunctionBudget bplus = budget, bminus = budget;
    bplus.seed = budget.seed + 101;
    bminus.seed = budget.seed + 101;  // common random numbers
    auto [up, sep] = tf.u_value(dom, bs.center + tf.direction * h, bplus);
    auto [um, sem] = tf.u_value(dom, bs.center - tf.direction * h, bminus);
    double deriv = std::abs(up - um) / (2.0 * h);
    double dse = std::sqrt(sep * sep + sem * sem) / (2.0 * h);
    double lower = deriv - 3.0 * dse;
    if (lower <= 0)
        throw CertificationError(
            "test function: directional gradient not certified positive (deriv " +
            std::to_string(deriv) + " +- " + std::to_string(dse) + ", u+ " +
            std::to_string(up) + ", u- " + std::to_string(um) + ")");
    tf.c10 = lower * bs.radius;  // written as c10 / radius in the bound
    return tf;
}

} // namespace hmlab
