#include "hmlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"

namespace hmlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

// Is angle a inside [ang0, ang1] (ang1 - ang0 <= 2*pi, ang0 may be any real)?
bool angle_in(double a, double ang0, double ang1) {
    if (ang1 - ang0 >= kTwoPi) return true;
    double rel = wrap_angle(a - ang0);
    return rel <= ang1 - ang0;
}
} // namespace

// ---------------------------------------------------------------------------
// Piece geometry
// ---------------------------------------------------------------------------

double Piece::length() const {
    switch (kind) {
        case Kind::Segment: return dist(a, b);
        case Kind::Arc: return radius * (ang1 - ang0);
        case Kind::Circle: return kTwoPi * radius;
        case Kind::Dot: return 0.0;
    }
    return 0.0;
}

Vec2 Piece::point_at(double arc) const {
    switch (kind) {
        case Kind::Segment: {
            double len = length();
            double t = len > 0 ? arc / len : 0.0;
            return a + (b - a) * t;
        }
        case Kind::Arc: {
            double ang = ang0 + arc / radius;
            return center + Vec2{std::cos(ang), std::sin(ang)} * radius;
        }
        case Kind::Circle: {
            double ang = arc / radius;
            return center + Vec2{std::cos(ang), std::sin(ang)} * radius;
        }
        case Kind::Dot: return a;
    }
    return a;
}

double Piece::nearest_arc(Vec2 p) const {
    switch (kind) {
        case Kind::Segment: {
            Vec2 ab = b - a;
            double len2 = ab.norm2();
            if (len2 == 0) return 0.0;
            double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
            return t * std::sqrt(len2);
        }
        case Kind::Arc: {
            double ang = std::atan2(p.y - center.y, p.x - center.x);
            if (angle_in(ang, ang0, ang1)) return radius * wrap_angle(ang - ang0);
            // outside angular range: nearest endpoint
            Vec2 e0 = point_at(0.0), e1 = point_at(length());
            return dist(p, e0) <= dist(p, e1) ? 0.0 : length();
        }
        case Kind::Circle: {
            double ang = wrap_angle(std::atan2(p.y - center.y, p.x - center.x));
            return radius * ang;
        }
        case Kind::Dot: return 0.0;
    }
    return 0.0;
}

double Piece::distance(Vec2 p) const {
    switch (kind) {
        case Kind::Segment: {
            Vec2 ab = b - a;
            double len2 = ab.norm2();
            if (len2 == 0) return dist(p, a);
            double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
            return dist(p, a + ab * t);
        }
        case Kind::Arc: {
            double ang = std::atan2(p.y - center.y, p.x - center.x);
            if (angle_in(ang, ang0, ang1)) return std::abs(dist(p, center) - radius);
            return std::min(dist(p, point_at(0.0)), dist(p, point_at(length())));
        }
        case Kind::Circle: return std::abs(dist(p, center) - radius);
        case Kind::Dot: return dist(p, a);
    }
    return 0.0;
}

Vec2 Piece::closest_point(Vec2 p) const { return point_at(nearest_arc(p)); }

Box2 Piece::bbox() const {
    switch (kind) {
        case Kind::Segment:
            return {{std::min(a.x, b.x), std::min(a.y, b.y)},
                    {std::max(a.x, b.x), std::max(a.y, b.y)}};
        case Kind::Circle:
            return {{center.x - radius, center.y - radius},
                    {center.x + radius, center.y + radius}};
        case Kind::Arc: {
            Vec2 e0 = point_at(0.0), e1 = point_at(length());
            Box2 bb{{std::min(e0.x, e1.x), std::min(e0.y, e1.y)},
                    {std::max(e0.x, e1.x), std::max(e0.y, e1.y)}};
            // extremal compass points inside the angular range
            const double dirs[4] = {0.0, 0.5 * kTwoPi * 0.5, 0.5 * kTwoPi, 0.75 * kTwoPi};
            for (double d : dirs) {
                if (angle_in(d, ang0, ang1)) {
                    Vec2 q = center + Vec2{std::cos(d), std::sin(d)} * radius;
                    bb.lo.x = std::min(bb.lo.x, q.x);
                    bb.lo.y = std::min(bb.lo.y, q.y);
                    bb.hi.x = std::max(bb.hi.x, q.x);
                    bb.hi.y = std::max(bb.hi.y, q.y);
                }
            }
            return bb;
        }
        case Kind::Dot: return {a, a};
    }
    return {};
}

namespace {
// Exact segment vs closed box intersection (Liang-Barsky clip).
bool segment_meets_box(Vec2 a, Vec2 b, const Box2& box) {
    double t0 = 0.0, t1 = 1.0;
    Vec2 d = b - a;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;
        double r = q / p;
        if (p < 0) {
            if (r > t1) return false;
            if (r > t0) t0 = r;
        } else {
            if (r < t0) return false;
            if (r < t1) t1 = r;
        }
        return true;
    };
    return clip(-d.x, a.x - box.lo.x) && clip(d.x, box.hi.x - a.x) &&
           clip(-d.y, a.y - box.lo.y) && clip(d.y, box.hi.y - a.y);
}

// Intersection points of a circle with a segment, as angles on the circle.
void circle_segment_angles(Vec2 c, double r, Vec2 a, Vec2 b, std::vector<double>& out) {
    Vec2 d = b - a;
    Vec2 f = a - c;
    double A = d.norm2();
    if (A == 0) return;
    double B = 2 * f.dot(d);
    double C = f.norm2() - r * r;
    double disc = B * B - 4 * A * C;
    if (disc < 0) return;
    double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
        if (t >= 0.0 && t <= 1.0) {
            Vec2 q = a + d * t;
            out.push_back(std::atan2(q.y - c.y, q.x - c.x));
        }
    }
}
} // namespace

bool Piece::intersects_box(const Box2& box) const {
    switch (kind) {
        case Kind::Segment: return segment_meets_box(a, b, box);
        case Kind::Dot: return box.contains(a);
        case Kind::Circle: {
            double lo = box.exterior_dist(center);
            double hi = box.farthest_dist(center);
            return lo <= radius && radius <= hi;
        }
        case Kind::Arc: {
            double lo = box.exterior_dist(center);
            double hi = box.farthest_dist(center);
            if (lo > radius || radius > hi) return false;
            if (box.contains(point_at(0.0)) || box.contains(point_at(length()))) return true;
            // circle crosses the box: check whether any crossing angle lies
            // in the arc's range
            std::vector<double> angs;
            Vec2 c00 = box.lo, c11 = box.hi;
            Vec2 c10{box.hi.x, box.lo.y}, c01{box.lo.x, box.hi.y};
            circle_segment_angles(center, radius, c00, c10, angs);
            circle_segment_angles(center, radius, c10, c11, angs);
            circle_segment_angles(center, radius, c11, c01, angs);
            circle_segment_angles(center, radius, c01, c00, angs);
            for (double ang : angs)
                if (angle_in(ang, ang0, ang1)) return true;
            // arc fully inside the box with no edge crossing
            if (lo == 0.0 && box.contains(point_at(length() * 0.5))) return true;
            return false;
        }
    }
    return false;
}

Piece make_segment(Vec2 a, Vec2 b, std::string label, bool window) {
    Piece p;
    p.kind = Piece::Kind::Segment;
    p.a = a;
    p.b = b;
    p.label = std::move(label);
    p.is_window = window;
    return p;
}

Piece make_circle(Vec2 c, double r, std::string label, bool window) {
    Piece p;
    p.kind = Piece::Kind::Circle;
    p.center = c;
    p.radius = r;
    p.label = std::move(label);
    p.is_window = window;
    return p;
}

Piece make_arc(Vec2 c, double r, double ang0, double ang1, std::string label) {
    Piece p;
    p.kind = Piece::Kind::Arc;
    p.center = c;
    p.radius = r;
    p.ang0 = ang0;
    p.ang1 = ang1;
    p.label = std::move(label);
    return p;
}

Piece make_dot(Vec2 pos, std::string label) {
    Piece p;
    p.kind = Piece::Kind::Dot;
    p.a = pos;
    p.label = std::move(label);
    return p;
}

// ---------------------------------------------------------------------------
// Domain distance / membership
// ---------------------------------------------------------------------------

double Domain::distance_bruteforce(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Piece& pc : pieces) best = std::min(best, pc.distance(p));
    return best;
}

double Domain::cantor_tree_distance(Vec2 p, double best, int* best_piece,
                                    Vec2* best_point) const {
    // Explicit stack over the implicit 4-ary square tree. Children live in
    // the corners of the parent square, so the parent box distance is a
    // lower bound for every descendant piece; the 1e-9 relative slack keeps
    // the pruning conservative against last-ulp disagreements.
    struct Item {
        Vec2 corner;
        double side;
        int depth;
        std::int64_t leaf_base;  // index of first leaf under this node
    };
    std::vector<Item> stack;
    stack.push_back({root_corner_, root_side_, 0, 0});
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        Box2 box{{it.corner.x, it.corner.y}, {it.corner.x + it.side, it.corner.y + it.side}};
        double lb = box.exterior_dist(p);
        if (lb * (1.0 - 1e-9) > best) continue;
        if (it.depth == level_) {
            const CantorNode& leaf = leaves_[static_cast<std::size_t>(it.leaf_base)];
            for (int k = 0; k < 4; ++k) {
                int pi = leaf.first_piece + k;
                double d = pieces[static_cast<std::size_t>(pi)].distance(p);
                if (d < best) {
                    best = d;
                    if (best_piece) *best_piece = pi;
                    if (best_point)
                        *best_point = pieces[static_cast<std::size_t>(pi)].closest_point(p);
                }
            }
            continue;
        }
        double cs = it.side * lambda_;
        std::int64_t stride = 1;
        for (int k = it.depth + 1; k < level_; ++k) stride *= 4;
        // corner order: SW, SE, NW, NE (address digits 0..3)
        Vec2 corners[4] = {
            it.corner,
            {it.corner.x + it.side - cs, it.corner.y},
            {it.corner.x, it.corner.y + it.side - cs},
            {it.corner.x + it.side - cs, it.corner.y + it.side - cs},
        };
        // visit nearest child first to tighten the bound early
        int order[4] = {0, 1, 2, 3};
        double d4[4];
        for (int k = 0; k < 4; ++k) {
            Box2 cb{{corners[k].x, corners[k].y},
                    {corners[k].x + cs, corners[k].y + cs}};
            d4[k] = cb.exterior_dist(p);
        }
        std::sort(order, order + 4, [&](int i, int j) { return d4[i] > d4[j]; });
        for (int k = 0; k < 4; ++k) {
            int c = order[k];
            stack.push_back({corners[c], cs, it.depth + 1, it.leaf_base + c * stride});
        }
    }
    return best;
}

double Domain::cap_tree_distance(Vec2 p, double best, int* best_piece,
                                 Vec2* best_point) const {
    if (cap_nodes_.empty()) return best;
    // nearest-first descent over the bbox tree, conservative pruning
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int ni = stack.back();
        stack.pop_back();
        const CapNode& node = cap_nodes_[static_cast<std::size_t>(ni)];
        if (node.box.exterior_dist(p) * (1.0 - 1e-9) > best) continue;
        if (node.first >= 0) {
            for (int k = 0; k < node.count; ++k) {
                int pi = cap_order_[static_cast<std::size_t>(node.first + k)];
                double d = pieces[static_cast<std::size_t>(pi)].distance(p);
                if (d < best) {
                    best = d;
                    if (best_piece) *best_piece = pi;
                    if (best_point)
                        *best_point = pieces[static_cast<std::size_t>(pi)].closest_point(p);
                }
            }
            continue;
        }
        double dl = cap_nodes_[static_cast<std::size_t>(node.left)].box.exterior_dist(p);
        double dr = cap_nodes_[static_cast<std::size_t>(node.right)].box.exterior_dist(p);
        if (dl < dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    return best;
}

double Domain::distance(Vec2 p) const {
    if (kind == DomainKind::CantorComplement) {
        // window circle is the last non-cap piece
        int win = first_cap_piece_ >= 0 ? first_cap_piece_ - 1
                                        : static_cast<int>(pieces.size()) - 1;
        double best = pieces[static_cast<std::size_t>(win)].distance(p);
        best = cantor_tree_distance(p, best, nullptr, nullptr);
        return cap_tree_distance(p, best, nullptr, nullptr);
    }
    int limit = first_cap_piece_ >= 0 ? first_cap_piece_ : static_cast<int>(pieces.size());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < limit; ++i)
        best = std::min(best, pieces[static_cast<std::size_t>(i)].distance(p));
    return cap_tree_distance(p, best, nullptr, nullptr);
}

double Domain::core_distance(Vec2 p) const {
    if (kind == DomainKind::CantorComplement)
        return cantor_tree_distance(p, std::numeric_limits<double>::infinity(), nullptr,
                                    nullptr);
    double best = std::numeric_limits<double>::infinity();
    for (const Piece& pc : pieces)
        if (!pc.is_window && pc.cap_host < 0) best = std::min(best, pc.distance(p));
    return best;
}

NearestHit Domain::nearest(Vec2 p) const {
    NearestHit hit;
    hit.dist = std::numeric_limits<double>::infinity();
    if (kind == DomainKind::CantorComplement) {
        int win = first_cap_piece_ >= 0 ? first_cap_piece_ - 1
                                        : static_cast<int>(pieces.size()) - 1;
        hit.piece = win;
        hit.dist = pieces[static_cast<std::size_t>(win)].distance(p);
        hit.point = pieces[static_cast<std::size_t>(win)].closest_point(p);
        hit.dist = cantor_tree_distance(p, hit.dist, &hit.piece, &hit.point);
        hit.dist = cap_tree_distance(p, hit.dist, &hit.piece, &hit.point);
        return hit;
    }
    int limit = first_cap_piece_ >= 0 ? first_cap_piece_ : static_cast<int>(pieces.size());
    for (int i = 0; i < limit; ++i) {
        double d = pieces[static_cast<std::size_t>(i)].distance(p);
        if (d < hit.dist) {
            hit.dist = d;
            hit.piece = i;
            hit.point = pieces[static_cast<std::size_t>(i)].closest_point(p);
        }
    }
    hit.dist = cap_tree_distance(p, hit.dist, &hit.piece, &hit.point);
    return hit;
}

bool Domain::contains(Vec2 p) const {
    switch (kind) {
        case DomainKind::HalfPlaneWindow:
            return p.y > 0 && dist(p, window.center) < window.radius;
        case DomainKind::Disc:
            return dist(p, window.center) < window.radius;
        case DomainKind::CantorComplement: {
            if (dist(p, window.center) >= window.radius) return false;
            // descend: p in Omega iff p is outside every level square
            Vec2 corner = root_corner_;
            double side = root_side_;
            for (int depth = 0; depth <= level_; ++depth) {
                if (p.x < corner.x || p.x > corner.x + side || p.y < corner.y ||
                    p.y > corner.y + side)
                    return true;  // escaped the closed square
                if (depth == level_) return false;
                double cs = side * lambda_;
                Vec2 corners[4] = {
                    corner,
                    {corner.x + side - cs, corner.y},
                    {corner.x, corner.y + side - cs},
                    {corner.x + side - cs, corner.y + side - cs},
                };
                bool found = false;
                for (Vec2 c : corners) {
                    if (p.x >= c.x && p.x <= c.x + cs && p.y >= c.y && p.y <= c.y + cs) {
                        corner = c;
                        side = cs;
                        found = true;
                        break;
                    }
                }
                if (!found) return true;  // in a gap between children
            }
            return false;
        }
        case DomainKind::CustomPieceUnion:
            return dist(p, window.center) < window.radius && distance(p) > 0;
    }
    return false;
}

double Domain::diameter() const { return 2.0 * window.radius; }

std::vector<int> Domain::core_piece_ids() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(pieces.size()); ++i)
        if (!pieces[static_cast<std::size_t>(i)].is_window &&
            pieces[static_cast<std::size_t>(i)].cap_host < 0)
            out.push_back(i);
    return out;
}

void Domain::add_cap_pieces(const std::vector<Piece>& caps) {
    if (first_cap_piece_ < 0) first_cap_piece_ = static_cast<int>(pieces.size());
    pieces.insert(pieces.end(), caps.begin(), caps.end());
    rebuild_cap_index();
}

void Domain::cantor_leaves_near(Vec2 p, double R, std::vector<int>& out) const {
    if (kind != DomainKind::CantorComplement) return;
    struct Item {
        Vec2 corner;
        double side;
        int depth;
        int leaf_base;
    };
    std::vector<Item> stack{{root_corner_, root_side_, 0, 0}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        Box2 box{{it.corner.x, it.corner.y}, {it.corner.x + it.side, it.corner.y + it.side}};
        if (box.exterior_dist(p) > R) continue;
        if (it.depth == level_) {
            out.push_back(it.leaf_base);
            continue;
        }
        double cs = it.side * lambda_;
        int stride = 1;
        for (int k = it.depth + 1; k < level_; ++k) stride *= 4;
        Vec2 corners[4] = {
            it.corner,
            {it.corner.x + it.side - cs, it.corner.y},
            {it.corner.x, it.corner.y + it.side - cs},
            {it.corner.x + it.side - cs, it.corner.y + it.side - cs},
        };
        for (int k = 0; k < 4; ++k)
            stack.push_back({corners[k], cs, it.depth + 1, it.leaf_base + k * stride});
    }
}

void Domain::rebuild_cap_index() {
    cap_nodes_.clear();
    cap_order_.clear();
    if (first_cap_piece_ < 0 || first_cap_piece_ >= static_cast<int>(pieces.size())) return;
    for (int pi = first_cap_piece_; pi < static_cast<int>(pieces.size()); ++pi)
        cap_order_.push_back(pi);
    std::vector<Box2> boxes(cap_order_.size());
    for (std::size_t i = 0; i < cap_order_.size(); ++i)
        boxes[i] = pieces[static_cast<std::size_t>(cap_order_[i])].bbox();
    // recursive median split on the wider axis
    struct Builder {
        std::vector<CapNode>& nodes;
        std::vector<int>& order;
        const std::vector<Piece>& pieces;
        int build(int first, int count) {
            CapNode node;
            Box2 bb = pieces[static_cast<std::size_t>(order[static_cast<std::size_t>(first)])].bbox();
            for (int k = 1; k < count; ++k) {
                Box2 pb = pieces[static_cast<std::size_t>(order[static_cast<std::size_t>(first + k)])].bbox();
                bb.lo.x = std::min(bb.lo.x, pb.lo.x);
                bb.lo.y = std::min(bb.lo.y, pb.lo.y);
                bb.hi.x = std::max(bb.hi.x, pb.hi.x);
                bb.hi.y = std::max(bb.hi.y, pb.hi.y);
            }
            node.box = bb;
            int idx = static_cast<int>(nodes.size());
            nodes.push_back(node);
            if (count <= 4) {
                nodes[static_cast<std::size_t>(idx)].first = first;
                nodes[static_cast<std::size_t>(idx)].count = count;
                return idx;
            }
            bool split_x = bb.width() >= bb.height();
            std::sort(order.begin() + first, order.begin() + first + count, [&](int a, int b) {
                Vec2 ca = pieces[static_cast<std::size_t>(a)].bbox().center();
                Vec2 cb = pieces[static_cast<std::size_t>(b)].bbox().center();
                return split_x ? ca.x < cb.x : ca.y < cb.y;
            });
            int half = count / 2;
            int l = build(first, half);
            int r = build(first + half, count - half);
            nodes[static_cast<std::size_t>(idx)].left = l;
            nodes[static_cast<std::size_t>(idx)].right = r;
            return idx;
        }
    };
    Builder b{cap_nodes_, cap_order_, pieces};
    b.build(0, static_cast<int>(cap_order_.size()));
}

// ---------------------------------------------------------------------------
// BoundaryRegion
// ---------------------------------------------------------------------------

bool BoundaryRegion::contains(const Domain&, int piece, Vec2 point) const {
    if (!std::binary_search(piece_ids.begin(), piece_ids.end(), piece)) return false;
    if (clip && !clip->contains_closed(point)) return false;
    return true;
}

BoundaryRegion BoundaryRegion::of_pieces(std::vector<int> ids, std::optional<Ball> clip) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    BoundaryRegion r;
    r.piece_ids = std::move(ids);
    r.clip = clip;
    return r;
}

BoundaryRegion BoundaryRegion::by_label_prefix(const Domain& dom, const std::string& prefix,
                                               std::optional<Ball> clip) {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(dom.pieces.size()); ++i)
        if (dom.pieces[static_cast<std::size_t>(i)].label.rfind(prefix, 0) == 0)
            ids.push_back(i);
    return of_pieces(std::move(ids), clip);
}

BoundaryRegion BoundaryRegion::whole_boundary(const Domain& dom) {
    std::vector<int> ids(dom.pieces.size());
    for (int i = 0; i < static_cast<int>(ids.size()); ++i) ids[static_cast<std::size_t>(i)] = i;
    return of_pieces(std::move(ids));
}

BoundaryRegion BoundaryRegion::core_boundary(const Domain& dom) {
    return of_pieces(dom.core_piece_ids());
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

Domain make_cantor(const CantorSpec& spec, double window_radius) {
    if (!(spec.lambda > 0.0 && spec.lambda < 0.5))
        throw ParameterError("cantor: lambda must be in (0, 1/2)");
    if (spec.level < 0) throw ParameterError("cantor: level must be >= 0");
    double side = std::pow(spec.lambda, spec.level);
    if (side < 1e-15 * window_radius)
        throw ResolutionError("cantor: level squares below machine resolution");
    double diam0 = std::sqrt(2.0);  // diam of K_{lambda,0} = [0,1]^2
    if (window_radius < 2.0 * diam0)
        throw ParameterError("cantor: window radius must be >= 2 diam(K)");

    Domain dom;
    dom.kind = DomainKind::CantorComplement;
    dom.cantor = spec;
    dom.lambda_ = spec.lambda;
    dom.level_ = spec.level;
    dom.root_corner_ = {0.0, 0.0};
    dom.root_side_ = 1.0;
    dom.window = {{0.5, 0.5}, window_radius};
    // conservative analytic constants for the family (certified witnesses
    // are computed per query; see corkscrew_witness)
    dom.params.alpha = (1.0 - 2.0 * spec.lambda) / 8.0;
    dom.params.beta = 0.59 * spec.lambda / 4.0;
    dom.params.d = 1;

    // enumerate leaf squares in address order (digits 0..3 per level)
    struct Rec {
        Vec2 corner;
        double s;
        int depth;
        std::string addr;
    };
    std::vector<Rec> stack{{dom.root_corner_, dom.root_side_, 0, "r"}};
    std::vector<Rec> leaves;
    while (!stack.empty()) {
        Rec r = stack.back();
        stack.pop_back();
        if (r.depth == spec.level) {
            leaves.push_back(r);
            continue;
        }
        double cs = r.s * spec.lambda;
        Vec2 corners[4] = {
            r.corner,
            {r.corner.x + r.s - cs, r.corner.y},
            {r.corner.x, r.corner.y + r.s - cs},
            {r.corner.x + r.s - cs, r.corner.y + r.s - cs},
        };
        for (int k = 3; k >= 0; --k)
            stack.push_back({corners[k], cs, r.depth + 1, r.addr + "." + std::to_string(k)});
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const Rec& a, const Rec& b) { return a.addr < b.addr; });

    const char* side_names[4] = {"S", "E", "N", "W"};
    for (const Rec& r : leaves) {
        Domain::CantorNode node;
        node.corner = r.corner;
        node.side = r.s;
        node.first_piece = static_cast<int>(dom.pieces.size());
        dom.leaves_.push_back(node);
        Vec2 c = r.corner;
        double s = r.s;
        Vec2 pts[4] = {c, {c.x + s, c.y}, {c.x + s, c.y + s}, {c.x, c.y + s}};
        for (int k = 0; k < 4; ++k)
            dom.pieces.push_back(
                make_segment(pts[k], pts[(k + 1) % 4], r.addr + "." + side_names[k]));
    }
    dom.pieces.push_back(make_circle(dom.window.center, dom.window.radius, "window", true));
    return dom;
}

Domain make_half_plane_window(double window_radius) {
    if (window_radius <= 0) throw ParameterError("half-plane: window radius must be > 0");
    Domain dom;
    dom.kind = DomainKind::HalfPlaneWindow;
    dom.window = {{0.0, 0.0}, window_radius};
    dom.params = {0.5, 0.25, 1};
    dom.pieces.push_back(
        make_segment({-window_radius, 0.0}, {window_radius, 0.0}, "axis"));
    dom.pieces.push_back(make_arc({0.0, 0.0}, window_radius, 0.0, 0.5 * kTwoPi, "window"));
    dom.pieces.back().is_window = true;
    return dom;
}

Domain make_disc(double radius, const std::vector<double>& breakpoints) {
    if (radius <= 0) throw ParameterError("disc: radius must be > 0");
    Domain dom;
    dom.kind = DomainKind::Disc;
    dom.window = {{0.0, 0.0}, radius};
    dom.params = {0.5, 0.25, 1};
    if (breakpoints.empty()) {
        dom.pieces.push_back(make_circle({0.0, 0.0}, radius, "arc0"));
    } else {
        std::vector<double> bps = breakpoints;
        std::sort(bps.begin(), bps.end());
        for (std::size_t i = 0; i < bps.size(); ++i) {
            double a0 = bps[i];
            double a1 = (i + 1 < bps.size()) ? bps[i + 1] : bps[0] + kTwoPi;
            if (a1 <= a0) a1 += kTwoPi;
            dom.pieces.push_back(
                make_arc({0.0, 0.0}, radius, a0, a1, "arc" + std::to_string(i)));
        }
    }
    return dom;
}

Domain make_custom(std::vector<Piece> pieces, Ball window, DomainParams params) {
    Domain dom;
    dom.kind = DomainKind::CustomPieceUnion;
    dom.pieces = std::move(pieces);
    dom.window = window;
    dom.params = params;
    for (const Piece& p : dom.pieces) {
        double far = 0.0;
        switch (p.kind) {
            case Piece::Kind::Segment:
                far = std::max(dist(p.a, window.center), dist(p.b, window.center));
                break;
            case Piece::Kind::Dot: far = dist(p.a, window.center); break;
            case Piece::Kind::Circle:
            case Piece::Kind::Arc: far = dist(p.center, window.center) + p.radius; break;
        }
        if (far > window.radius * (1.0 + 1e-12))
            throw ParameterError("custom domain: piece '" + p.label + "' outside the window");
    }
    return dom;
}

// ---------------------------------------------------------------------------
// grid_cover_count
// ---------------------------------------------------------------------------

namespace {
struct CellKey {
    std::int64_t x, y;
    bool operator<(const CellKey& o) const { return x < o.x || (x == o.x && y < o.y); }
};

std::int64_t cell_of(double v, double tau) {
    return static_cast<std::int64_t>(std::floor(v / tau));
}

void rasterize_segment(Vec2 a, Vec2 b, double tau, std::set<CellKey>& cells) {
    // Axis-aligned sides are exact; general segments walk the parameter at
    // tau/8 and insert visited cells.
    if (a.x == b.x || a.y == b.y) {
        if (a.x == b.x) {
            std::int64_t cx = cell_of(a.x, tau);
            std::int64_t y0 = cell_of(std::min(a.y, b.y), tau);
            std::int64_t y1 = cell_of(std::max(a.y, b.y), tau);
            for (std::int64_t y = y0; y <= y1; ++y) cells.insert({cx, y});
        }
        if (a.y == b.y) {
            std::int64_t cy = cell_of(a.y, tau);
            std::int64_t x0 = cell_of(std::min(a.x, b.x), tau);
            std::int64_t x1 = cell_of(std::max(a.x, b.x), tau);
            for (std::int64_t x = x0; x <= x1; ++x) cells.insert({x, cy});
        }
        return;
    }
    double len = dist(a, b);
    int n = std::max(2, static_cast<int>(std::ceil(len / (tau / 8.0))) + 1);
    for (int i = 0; i <= n; ++i) {
        Vec2 q = a + (b - a) * (static_cast<double>(i) / n);
        cells.insert({cell_of(q.x, tau), cell_of(q.y, tau)});
    }
}
} // namespace

std::int64_t grid_cover_count(const Domain& dom, const BoundaryRegion& region, double tau) {
    if (tau <= 0) throw PreconditionError("grid_cover_count: tau must be > 0");
    std::set<CellKey> cells;
    for (int pi : region.piece_ids) {
        const Piece& p = dom.pieces[static_cast<std::size_t>(pi)];
        switch (p.kind) {
            case Piece::Kind::Segment:
                rasterize_segment(p.a, p.b, tau, cells);
                break;
            case Piece::Kind::Dot:
                cells.insert({cell_of(p.a.x, tau), cell_of(p.a.y, tau)});
                break;
            case Piece::Kind::Circle:
            case Piece::Kind::Arc: {
                double len = p.length();
                int n = std::max(8, static_cast<int>(std::ceil(len / (tau / 8.0))) + 1);
                for (int i = 0; i <= n; ++i) {
                    Vec2 q = p.point_at(len * static_cast<double>(i) / n);
                    cells.insert({cell_of(q.x, tau), cell_of(q.y, tau)});
                }
                break;
            }
        }
    }
    if (region.clip) {
        std::int64_t count = 0;
        for (const CellKey& ck : cells) {
            Box2 cb{{static_cast<double>(ck.x) * tau, static_cast<double>(ck.y) * tau},
                    {static_cast<double>(ck.x + 1) * tau, static_cast<double>(ck.y + 1) * tau}};
            if (cb.meets_ball(*region.clip)) ++count;
        }
        return count;
    }
    return static_cast<std::int64_t>(cells.size());
}

// ---------------------------------------------------------------------------
// Corkscrew witnesses
// ---------------------------------------------------------------------------

Ball best_interior_ball(const Domain& dom, Vec2 x, double r, int refine) {
    // Deterministic coarse-to-fine search of p maximizing
    //   rho(p) = min(distance(p), r - |p - x|).
    Vec2 best_p = x;
    double best_rho = -1.0;
    Vec2 lo{x.x - r, x.y - r}, span{2 * r, 2 * r};
    int n = 17;
    for (int pass = 0; pass <= refine; ++pass) {
        Vec2 pass_best = best_p;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                Vec2 p{lo.x + span.x * i / n, lo.y + span.y * j / n};
                double slack = r - dist(p, x);
                if (slack <= 0) continue;
                if (!dom.contains(p)) continue;
                double rho = std::min(dom.distance(p), slack);
                if (rho > best_rho) {
                    best_rho = rho;
                    pass_best = p;
                }
            }
        }
        best_p = pass_best;
        span = span * (2.5 / n);
        lo = {best_p.x - span.x * 0.5, best_p.y - span.y * 0.5};
    }
    return {best_p, std::max(best_rho, 0.0)};
}

Ball corkscrew_witness(const Domain& dom, Vec2 x, double r) {
    if (!(r > 0) || r >= dom.diameter())
        throw PreconditionError("corkscrew_witness: need 0 < r < diam(Omega)");
    double want = dom.params.alpha * r;
    if (dom.kind == DomainKind::HalfPlaneWindow && x.y == 0.0 &&
        std::abs(x.x) + r * 0.5 <= dom.window.radius) {
        return {{x.x, r * 0.5}, r * 0.5};
    }
    if (dom.kind == DomainKind::Disc) {
        Vec2 inward = (dom.window.center - x).normalized();
        double rr = std::min(r, dom.window.radius) * 0.5;
        return {x + inward * rr, rr};
    }
    Ball b = best_interior_ball(dom, x, r);
    if (b.radius < want)
        throw CorkscrewViolation("corkscrew witness below declared alpha: found " +
                                 std::to_string(b.radius / r) + " < " +
                                 std::to_string(dom.params.alpha) + " at scale " +
                                 std::to_string(r));
    return {b.center, want};
}

BoundaryRegion cantor_checkerboard(const Domain& dom) {
    if (dom.kind != DomainKind::CantorComplement)
        throw UsageError("cantor_checkerboard: cantor domain required");
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(dom.pieces.size()); ++i) {
        const Piece& p = dom.pieces[static_cast<std::size_t>(i)];
        if (p.is_window || p.cap_host >= 0) continue;
        int digit_sum = 0;
        for (char c : p.label)
            if (c >= '0' && c <= '3') digit_sum += c - '0';
        if (digit_sum % 2 == 0) ids.push_back(i);
    }
    return BoundaryRegion::of_pieces(std::move(ids));
}

// ---------------------------------------------------------------------------
// JSON spec
// ---------------------------------------------------------------------------

std::string domain_spec_to_json(const Domain& dom) {
    nlohmann::json j;
    switch (dom.kind) {
        case DomainKind::CantorComplement: j["kind"] = "cantor-complement-in-window"; break;
        case DomainKind::HalfPlaneWindow: j["kind"] = "half-plane-window"; break;
        case DomainKind::Disc: j["kind"] = "disc"; break;
        case DomainKind::CustomPieceUnion: j["kind"] = "custom-piece-union"; break;
    }
    if (dom.cantor) {
        j["lambda"] = dom.cantor->lambda;
        j["level"] = dom.cantor->level;
    }
    j["window_radius"] = dom.window.radius;
    j["alpha"] = dom.params.alpha;
    j["beta"] = dom.params.beta;
    return j.dump(2);
}

Domain domain_from_spec_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "cantor-complement-in-window") {
        CantorSpec spec;
        spec.lambda = j.at("lambda").get<double>();
        spec.level = j.at("level").get<int>();
        double wr = j.value("window_radius", 4.0);
        Domain d = make_cantor(spec, wr);
        if (j.contains("alpha")) d.params.alpha = j["alpha"].get<double>();
        if (j.contains("beta")) d.params.beta = j["beta"].get<double>();
        return d;
    }
    if (kind == "half-plane-window") return make_half_plane_window(j.value("window_radius", 32.0));
    if (kind == "disc") return make_disc(j.value("window_radius", 1.0));
    throw UsageError("domain spec: unsupported kind '" + kind + "'");
}

} // namespace hmlab
