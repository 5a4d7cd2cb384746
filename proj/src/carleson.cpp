#include "hmlab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

HarmonicFunctionHandle HarmonicFunctionHandle::analytic(std::function<double(Vec2)> f,
                                                        std::function<Vec2(Vec2)> grad,
                                                        double sup) {
    HarmonicFunctionHandle h;
    h.kind = Kind::Analytic;
    h.f = std::move(f);
    h.exact_grad = std::move(grad);
    h.sup_norm = sup;
    return h;
}

HarmonicFunctionHandle HarmonicFunctionHandle::halfplane_angle() {
    return analytic([](Vec2 p) { return std::atan2(p.y, p.x) / kPi; },
                    [](Vec2 p) {
                        double r2 = p.norm2();
                        return Vec2{-p.y / (kPi * r2), p.x / (kPi * r2)};
                    },
                    1.0);
}

HarmonicFunctionHandle HarmonicFunctionHandle::wos_region(const Domain& dom,
                                                          BoundaryRegion region,
                                                          std::int64_t budget, double shell,
                                                          std::uint64_t seed) {
    HarmonicFunctionHandle h;
    h.kind = Kind::WosRegion;
    h.dom = &dom;
    h.region = std::move(region);
    h.budget = budget;
    h.shell = shell;
    h.seed = seed;
    h.sup_norm = 1.0;
    return h;
}

std::pair<double, double> HarmonicFunctionHandle::value(Vec2 p) const {
    switch (kind) {
        case Kind::Analytic: return {f(p), 0.0};
        case Kind::WosRegion: {
            MeasureEstimate e = wos_measure(*dom, p, region, shell, budget, seed);
            return {e.value, e.stderr_};
        }
        case Kind::TestFn: {
            TestFunctionBudget b;
            b.samples = budget;
            b.shell = shell;
            b.seed = seed;
            return test_fn->u_value(*dom, p, b);
        }
    }
    return {0.0, 0.0};
}

GradEstimate grad_estimate(const HarmonicFunctionHandle& u, Vec2 p, double step) {
    if (!(step > 0)) throw PreconditionError("grad_estimate: step must be > 0");
    if (u.dom && u.dom->distance(p) < 2.0 * step)
        throw PreconditionError("grad_estimate: B(p, 2 step) not inside Omega");
    if (u.kind == HarmonicFunctionHandle::Kind::Analytic && u.exact_grad)
        return {u.exact_grad(p), {0.0, 0.0}};
    GradEstimate g;
    Vec2 dirs[2] = {{1.0, 0.0}, {0.0, 1.0}};
    for (int k = 0; k < 2; ++k) {
        // common random numbers: both sides reuse the handle's seed
        auto [vp, sp] = u.value(p + dirs[k] * step);
        auto [vm, sm] = u.value(p - dirs[k] * step);
        double d = (vp - vm) / (2.0 * step);
        double se = std::sqrt(sp * sp + sm * sm) / (2.0 * step);
        if (k == 0) {
            g.grad.x = d;
            g.stderr_.x = se;
        } else {
            g.grad.y = d;
            g.stderr_.y = se;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Exact box cap disc area
// ---------------------------------------------------------------------------

namespace {
// Area of the intersection of the disc |q| <= r with the triangle (0, a, b),
// signed by the orientation of (a, b).
double tri_disc_area(Vec2 a, Vec2 b, double r) {
    auto cross = [](Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; };
    double c = cross(a, b);
    if (c == 0.0) return 0.0;
    bool a_in = a.norm2() <= r * r;
    bool b_in = b.norm2() <= r * r;
    if (a_in && b_in) return 0.5 * c;
    // intersections of segment ab with the circle
    Vec2 d = b - a;
    double A = d.norm2();
    double B = 2.0 * a.dot(d);
    double C = a.norm2() - r * r;
    double disc = B * B - 4 * A * C;
    auto sector = [&](Vec2 u, Vec2 v) {
        double ang = std::atan2(cross(u, v), u.dot(v));
        return 0.5 * r * r * ang;
    };
    if (!a_in && !b_in) {
        if (disc <= 0.0) return sector(a, b);
        double sq = std::sqrt(disc);
        double t0 = (-B - sq) / (2 * A), t1 = (-B + sq) / (2 * A);
        if (t1 <= 0.0 || t0 >= 1.0 || t0 >= t1) return sector(a, b);
        t0 = std::max(t0, 0.0);
        t1 = std::min(t1, 1.0);
        Vec2 p0 = a + d * t0, p1 = a + d * t1;
        return sector(a, p0) + 0.5 * cross(p0, p1) + sector(p1, b);
    }
    double sq = std::sqrt(std::max(disc, 0.0));
    double t0 = (-B - sq) / (2 * A), t1 = (-B + sq) / (2 * A);
    if (a_in) {
        double t = std::clamp(t1, 0.0, 1.0);
        Vec2 p = a + d * t;
        return 0.5 * cross(a, p) + sector(p, b);
    }
    double t = std::clamp(t0, 0.0, 1.0);
    Vec2 p = a + d * t;
    return sector(a, p) + 0.5 * cross(p, b);
}
} // namespace

double box_disc_area(const Box2& box, Vec2 center, double radius) {
    Vec2 v[4] = {{box.lo.x - center.x, box.lo.y - center.y},
                 {box.hi.x - center.x, box.lo.y - center.y},
                 {box.hi.x - center.x, box.hi.y - center.y},
                 {box.lo.x - center.x, box.hi.y - center.y}};
    double area = 0.0;
    for (int i = 0; i < 4; ++i) area += tri_disc_area(v[i], v[(i + 1) % 4], radius);
    return std::max(0.0, area);
}

// ---------------------------------------------------------------------------
// Carleson functional
// ---------------------------------------------------------------------------

CarlesonReport carleson_functional(const Domain& dom, const HarmonicFunctionHandle& u,
                                   Vec2 x, double r, double min_side) {
    if (!(r > 0) || r >= dom.diameter())
        throw PreconditionError("carleson: need 0 < r < diam(Omega)");
    Ball region{x, r};
    WhitneyDecomposition dec = whitney_decompose(dom, region, min_side);
    CarlesonReport rep;
    rep.center = x;
    rep.radius = r;
    rep.quadrature_cells = static_cast<std::int64_t>(dec.cells.size());
    int d = dom.params.d;

    std::vector<double> contrib(dec.cells.size(), 0.0);
    std::vector<double> bias(dec.cells.size(), 0.0);
    std::vector<int> noisy;
    std::mutex noisy_mu;
    parallel_for(static_cast<std::int64_t>(dec.cells.size()), [&](std::int64_t lo,
                                                                  std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const WhitneyCell& c = dec.cells[static_cast<std::size_t>(i)];
            Box2 box = c.cube.box();
            double area = box_disc_area(box, x, r);
            if (area <= 0.0) continue;
            Vec2 ctr = box.center();
            double dist_b = c.dist_to_boundary;
            double step = c.cube.side() / 8.0;
            HarmonicFunctionHandle uh = u;
            GradEstimate g{};
            double harnack = 2.0 * u.sup_norm / dist_b;
            if (u.kind == HarmonicFunctionHandle::Kind::Analytic) {
                g = grad_estimate(uh, ctr, step);
            } else {
                // noise contract: stderr below 10% of the Harnack bound
                for (int attempt = 0;; ++attempt) {
                    g = grad_estimate(uh, ctr, step);
                    double se = std::max(g.stderr_.x, g.stderr_.y);
                    if (se < 0.1 * harnack || attempt >= 3) {
                        if (se >= 0.1 * harnack) {
                            std::lock_guard<std::mutex> lock(noisy_mu);
                            noisy.push_back(static_cast<int>(i));
                        }
                        break;
                    }
                    uh.budget *= 2;
                }
            }
            double g2 = g.grad.norm2();
            double b2 = g.stderr_.x * g.stderr_.x + g.stderr_.y * g.stderr_.y;
            // subtract the squared-noise bias E|ghat|^2 = |g|^2 + var
            double val = std::max(0.0, g2 - b2);
            contrib[static_cast<std::size_t>(i)] = val * dist_b * area;
            bias[static_cast<std::size_t>(i)] = b2 * dist_b * area;
        }
    });
    if (!noisy.empty()) {
        std::ostringstream os;
        os << "carleson: gradient noise above tolerance on " << noisy.size()
           << " cells (first level " << dec.cells[static_cast<std::size_t>(noisy[0])].cube.level
           << ")";
        throw CertificationError(os.str());
    }
    double sum = 0.0, bias_sum = 0.0;
    for (double v : contrib) sum += v;
    for (double v : bias) bias_sum += v;
    double rd = std::pow(r, d);
    rep.value = sum / rd;
    rep.noise_bias_subtracted = bias_sum / rd;
    rep.truncation_bound = 16.0 * u.sup_norm * u.sup_norm * dec.remainder_side_d / rd;
    return rep;
}

// ---------------------------------------------------------------------------
// dist integral
// ---------------------------------------------------------------------------

namespace {
struct QuadAccum {
    double integral = 0.0;
    double skipped = 0.0;
    std::int64_t cells = 0;
};

void quad_recurse(const Domain& dom, Vec2 x, double R, Box2 cell, double min_side,
                  std::int64_t quad_cells, QuadAccum& acc) {
    double area = box_disc_area(cell, x, R);
    if (area <= 0.0) return;
    if (acc.cells > quad_cells)
        throw UsageError("dist_integral: cell budget exceeded; increase quad-cells");
    Vec2 ctr = cell.center();
    double side = cell.width();
    double d = dom.core_distance(ctr);
    double half_diag = side * 0.7071067811865476;
    if (d > half_diag) {
        bool outside_k = dom.contains(ctr) || dist(ctr, dom.window.center) >= dom.window.radius;
        if (!outside_k) return;  // cell inside K
        if (side <= 0.5 * d) {
            acc.integral += area / d;
            acc.cells += 1;
            return;
        }
    } else if (side <= min_side) {
        acc.skipped += area;
        acc.cells += 1;
        return;
    }
    double h = side * 0.5;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Box2 sub{{cell.lo.x + i * h, cell.lo.y + j * h},
                     {cell.lo.x + i * h + h, cell.lo.y + j * h + h}};
            quad_recurse(dom, x, R, sub, min_side, quad_cells, acc);
        }
}
} // namespace

DistIntegralReport dist_integral(const Domain& dom, Vec2 x, double R,
                                 std::int64_t quad_cells, double min_side) {
    if (!(R > 0)) throw PreconditionError("dist_integral: R > 0");
    if (!(min_side > 0)) throw PreconditionError("dist_integral: min_side > 0");
    DistIntegralReport rep;
    for (int pass = 0; pass < 3; ++pass) {
        double ms = min_side / std::ldexp(1.0, pass);
        QuadAccum acc;
        Box2 root{{x.x - R, x.y - R}, {x.x + R, x.y + R}};
        quad_recurse(dom, x, R, root, ms, quad_cells, acc);
        rep.refine_values.push_back(acc.integral / R);
        if (pass == 2) {
            rep.value = acc.integral / R;
            rep.skipped_volume = acc.skipped;
            rep.cells = acc.cells;
        }
    }
    double inc = rep.refine_values[2] - rep.refine_values[1];
    rep.saturated = rep.value > 0 && std::abs(inc) < 0.02 * rep.value;
    return rep;
}

// ---------------------------------------------------------------------------
// eps approximant
// ---------------------------------------------------------------------------

double EpsApproximant::eval(Vec2 p) const {
    for (const Cell& c : cells)
        if (c.cube.box().contains(p)) return c.value;
    return std::numeric_limits<double>::quiet_NaN();
}

EpsApproximant eps_approximant(const Domain& dom, const HarmonicFunctionHandle& u,
                               double eps, const Ball& region, double min_side) {
    if (!(eps > 0)) throw PreconditionError("eps_approximant: eps > 0");
    EpsApproximant out;
    out.eps = eps;
    // trivial case: eps covers the whole range of u
    if (eps >= 2.0 * u.sup_norm) {
        out.success = true;
        out.bv_ratio = 0.0;
        return out;
    }
    WhitneyDecomposition dec = whitney_decompose(dom, region, min_side);

    // Subdivide cells until the sampled oscillation against the center value
    // is below eps/2. Oscillation scales like side/dist, so cells hugging the
    // truncation scale need to split below the Whitney floor; the subdivision
    // floor is therefore eps-proportional.
    double sub_floor = min_side * eps / 32.0;
    std::vector<EpsApproximant::Cell> final_cells;
    std::vector<DyadicCube> work;
    for (const WhitneyCell& c : dec.cells) work.push_back(c.cube);
    while (!work.empty()) {
        DyadicCube q = work.back();
        work.pop_back();
        Box2 box = q.box();
        Vec2 ctr = box.center();
        auto [vc, se] = u.value(ctr);
        double osc = 0.0;
        Vec2 probes[8] = {box.lo,
                          box.hi,
                          {box.lo.x, box.hi.y},
                          {box.hi.x, box.lo.y},
                          {ctr.x, box.lo.y},
                          {ctr.x, box.hi.y},
                          {box.lo.x, ctr.y},
                          {box.hi.x, ctr.y}};
        for (Vec2 p : probes) {
            auto [vp, sp] = u.value(p);
            osc = std::max(osc, std::abs(vp - vc) + 3.0 * std::sqrt(sp * sp + se * se));
        }
        if (osc < 0.5 * eps) {
            final_cells.push_back({q, vc});
            continue;
        }
        if (q.side() * 0.5 < sub_floor) {
            out.failed_cells += 1;
            final_cells.push_back({q, vc});
            continue;
        }
        out.subdivided += 1;
        for (int cx = 0; cx < 2; ++cx)
            for (int cy = 0; cy < 2; ++cy) work.push_back(q.child(cx, cy));
    }
    out.cells = std::move(final_cells);
    out.success = out.failed_cells == 0;

    // face-jump total variation: match vertical and horizontal faces between
    // adjacent cells by exact dyadic coordinates
    struct Edge {
        double t0, t1;  // interval along the face
        int cell;
        bool positive_side;
    };
    std::map<double, std::vector<Edge>> vfaces, hfaces;
    for (int i = 0; i < static_cast<int>(out.cells.size()); ++i) {
        Box2 b = out.cells[static_cast<std::size_t>(i)].cube.box();
        vfaces[b.lo.x].push_back({b.lo.y, b.hi.y, i, false});
        vfaces[b.hi.x].push_back({b.lo.y, b.hi.y, i, true});
        hfaces[b.lo.y].push_back({b.lo.x, b.hi.x, i, false});
        hfaces[b.hi.y].push_back({b.lo.x, b.hi.x, i, true});
    }
    double tv = 0.0;
    auto sweep = [&](std::map<double, std::vector<Edge>>& faces, bool vertical) {
        for (auto& [coord, edges] : faces) {
            std::sort(edges.begin(), edges.end(),
                      [](const Edge& a, const Edge& b) { return a.t0 < b.t0; });
            for (std::size_t i = 0; i < edges.size(); ++i) {
                if (!edges[i].positive_side) continue;
                for (std::size_t k = 0; k < edges.size(); ++k) {
                    if (edges[k].positive_side) continue;
                    double lo = std::max(edges[i].t0, edges[k].t0);
                    double hi = std::min(edges[i].t1, edges[k].t1);
                    if (hi <= lo) continue;
                    double mid = 0.5 * (lo + hi);
                    Vec2 fp = vertical ? Vec2{coord, mid} : Vec2{mid, coord};
                    if (dist(fp, region.center) > region.radius) continue;
                    tv += (hi - lo) *
                          std::abs(out.cells[static_cast<std::size_t>(edges[i].cell)].value -
                                   out.cells[static_cast<std::size_t>(edges[k].cell)].value);
                }
            }
        }
    };
    sweep(vfaces, true);
    sweep(hfaces, false);
    out.bv_ratio = tv / std::pow(region.radius, dom.params.d);

    // faces with no partner sit against the unresolved shell
    out.remainder_face_length = 0.0;
    for (auto& [coord, edges] : vfaces) {
        (void)coord;
        for (const Edge& e : edges) {
            double covered = 0.0;
            for (const Edge& o : edges) {
                if (o.positive_side == e.positive_side) continue;
                covered += std::max(0.0, std::min(e.t1, o.t1) - std::max(e.t0, o.t0));
            }
            out.remainder_face_length += std::max(0.0, (e.t1 - e.t0) - covered);
        }
    }
    return out;
}

} // namespace hmlab
