#include "hmlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hmlab/errors.hpp"

namespace hmlab {

bool dilate_meets_boundary(const DyadicCube& cube, double c, const Domain& dom) {
    Box2 box = cube.box().dilated(c);
    // cheap reject/accept by center distance first
    Vec2 ctr = box.center();
    double half_diag = 0.5 * std::hypot(box.width(), box.height());
    double d = dom.distance(ctr);
    if (d > half_diag) return false;
    double inradius = 0.5 * std::min(box.width(), box.height());
    if (d <= inradius) return true;  // nearest boundary point inside the box
    for (const Piece& p : dom.pieces) {
        if (!p.bbox().intersects(box)) continue;
        if (p.intersects_box(box)) return true;
    }
    return false;
}

namespace {
struct CubeKey {
    int level;
    std::int64_t kx, ky;
    bool operator<(const CubeKey& o) const {
        if (level != o.level) return level < o.level;
        if (kx != o.kx) return kx < o.kx;
        return ky < o.ky;
    }
};
CubeKey key_of(const DyadicCube& q) { return {q.level, q.kx, q.ky}; }
} // namespace

WhitneyDecomposition whitney_decompose(const Domain& dom, const Ball& region,
                                       double min_side) {
    if (!(min_side > 0)) throw PreconditionError("whitney: min_side must be > 0");
    WhitneyDecomposition out;
    out.min_side = min_side;
    const WhitneyConstants k = out.constants;

    // Root cubes: level chosen so the root side strictly exceeds the window
    // diameter; then any root meeting the window either misses Omega or has
    // a boundary point in its c6-dilate, so top-down recursion visits every
    // maximal cube.
    double extent = std::max(std::abs(dom.window.center.x), std::abs(dom.window.center.y)) +
                    dom.window.radius;
    int root_level = 0;
    while (std::ldexp(1.0, -root_level) < 4.0 * extent) --root_level;

    std::set<CubeKey> emitted;
    std::vector<DyadicCube> stack;
    double root_side = std::ldexp(1.0, -root_level);
    std::int64_t r0 = static_cast<std::int64_t>(std::floor((dom.window.center.x - dom.window.radius) / root_side));
    std::int64_t r1 = static_cast<std::int64_t>(std::floor((dom.window.center.x + dom.window.radius) / root_side));
    std::int64_t s0 = static_cast<std::int64_t>(std::floor((dom.window.center.y - dom.window.radius) / root_side));
    std::int64_t s1 = static_cast<std::int64_t>(std::floor((dom.window.center.y + dom.window.radius) / root_side));
    for (std::int64_t i = r0; i <= r1; ++i)
        for (std::int64_t j = s0; j <= s1; ++j) stack.push_back({root_level, i, j, 1.0});

    auto emit = [&](DyadicCube q) {
        // promote to the maximal ancestor whose c6-dilate still misses
        while (!dilate_meets_boundary(q.parent(), k.c6, dom) && q.level > root_level - 40)
            q = q.parent();
        if (emitted.insert(key_of(q)).second) {
            WhitneyCell cell;
            cell.cube = q;
            cell.dist_to_boundary = dom.distance(q.box().center());
            out.cells.push_back(cell);
        }
    };

    while (!stack.empty()) {
        DyadicCube q = stack.back();
        stack.pop_back();
        Box2 box = q.box();
        if (!box.meets_ball(region)) continue;
        if (!dilate_meets_boundary(q, k.c6, dom)) {
            if (dom.contains(box.center())) emit(q);
            continue;
        }
        if (q.side() * 0.5 < min_side) {
            out.remainder_volume += box.width() * box.height();
            out.remainder_side_d += std::pow(q.side(), dom.params.d);
            out.remainder_cells += 1;
            continue;
        }
        for (int cx = 0; cx < 2; ++cx)
            for (int cy = 0; cy < 2; ++cy) stack.push_back(q.child(cx, cy));
    }

    std::sort(out.cells.begin(), out.cells.end(), [](const WhitneyCell& a, const WhitneyCell& b) {
        return key_of(a.cube) < key_of(b.cube);
    });
    return out;
}

CellCase classify_case(const WhitneyCell& cell, const Domain& other_boundary,
                       const WhitneyConstants& k) {
    return dilate_meets_boundary(cell.cube, k.c8, other_boundary) ? CellCase::II : CellCase::I;
}

void classify_all(WhitneyDecomposition& dec, const Domain& other_boundary) {
    for (WhitneyCell& c : dec.cells) c.label = classify_case(c, other_boundary, dec.constants);
}

bool check_whitney_properties(const WhitneyDecomposition& dec, const Domain& dom,
                              std::string* first_failure) {
    for (const WhitneyCell& c : dec.cells) {
        if (dilate_meets_boundary(c.cube, dec.constants.c6, dom)) {
            if (first_failure) {
                std::ostringstream os;
                os << "c6-dilate meets boundary at level " << c.cube.level << " k=("
                   << c.cube.kx << "," << c.cube.ky << ")";
                *first_failure = os.str();
            }
            return false;
        }
        if (!dilate_meets_boundary(c.cube, dec.constants.c7, dom)) {
            if (first_failure) {
                std::ostringstream os;
                os << "c7-dilate misses boundary at level " << c.cube.level << " k=("
                   << c.cube.kx << "," << c.cube.ky << ")";
                *first_failure = os.str();
            }
            return false;
        }
    }
    return true;
}

bool check_disjointness(const WhitneyDecomposition& dec) {
    std::set<CubeKey> keys;
    int min_level = 0;
    for (const WhitneyCell& c : dec.cells) {
        if (!keys.insert(key_of(c.cube)).second) return false;
        min_level = std::min(min_level, c.cube.level);
    }
    for (const WhitneyCell& c : dec.cells) {
        DyadicCube q = c.cube;
        while (q.level > min_level) {
            q = q.parent();
            if (keys.count(key_of(q))) return false;
        }
    }
    return true;
}

int measured_overlap(const WhitneyDecomposition& dec) {
    // index dilated boxes on a coarse grid keyed by cell, then probe
    std::vector<Box2> boxes;
    boxes.reserve(dec.cells.size());
    for (const WhitneyCell& c : dec.cells) boxes.push_back(c.cube.box().dilated(dec.constants.c6));
    int best = 0;
    // probes: centers and corners of every cell
    std::vector<Vec2> probes;
    probes.reserve(dec.cells.size() * 5);
    for (const WhitneyCell& c : dec.cells) {
        Box2 b = c.cube.box();
        probes.push_back(b.center());
        probes.push_back(b.lo);
        probes.push_back(b.hi);
        probes.push_back({b.lo.x, b.hi.y});
        probes.push_back({b.hi.x, b.lo.y});
    }
    // sort boxes by lo.x for a sweep-style prefilter
    std::vector<int> order(boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return boxes[static_cast<std::size_t>(a)].lo.x < boxes[static_cast<std::size_t>(b)].lo.x; });
    std::vector<double> lox(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) lox[i] = boxes[static_cast<std::size_t>(order[i])].lo.x;
    double max_width = 0;
    for (const Box2& b : boxes) max_width = std::max(max_width, b.width());
    for (Vec2 p : probes) {
        auto hi = std::upper_bound(lox.begin(), lox.end(), p.x);
        auto lo = std::lower_bound(lox.begin(), lox.end(), p.x - max_width);
        int count = 0;
        for (auto it = lo; it != hi; ++it) {
            const Box2& b = boxes[static_cast<std::size_t>(order[static_cast<std::size_t>(it - lox.begin())])];
            if (b.contains(p)) ++count;
        }
        best = std::max(best, count);
    }
    return best;
}

double case2_mass_ratio(const WhitneyDecomposition& dec, const Ball& b, int d) {
    double sum = 0.0;
    for (const WhitneyCell& c : dec.cells) {
        if (c.label != CellCase::II) continue;
        if (!c.cube.box().meets_ball(b)) continue;
        sum += std::pow(c.cube.side(), d);
    }
    return sum / std::pow(b.radius, d);
}

std::string cells_to_csv(const WhitneyDecomposition& dec) {
    std::ostringstream os;
    os << "level,kx,ky,side,case,dist\n";
    os.precision(17);
    for (const WhitneyCell& c : dec.cells) {
        const char* cs = c.label == CellCase::I ? "I" : (c.label == CellCase::II ? "II" : "-");
        os << c.cube.level << ',' << c.cube.kx << ',' << c.cube.ky << ',' << c.cube.side()
           << ',' << cs << ',' << c.dist_to_boundary << '\n';
    }
    return os.str();
}

} // namespace hmlab
