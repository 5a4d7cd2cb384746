#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmlab/vec.hpp"

namespace hmlab {

// ---------------------------------------------------------------------------
// Boundary pieces
// ---------------------------------------------------------------------------

// A labeled boundary primitive. The boundary of a domain is a finite union
// of these; distance queries and walk termination attribute to pieces.
struct Piece {
    enum class Kind { Segment, Arc, Circle, Dot };

    Kind kind = Kind::Segment;
    Vec2 a, b;            // Segment endpoints / Dot position (a)
    Vec2 center;          // Arc, Circle
    double radius = 0.0;  // Arc, Circle
    double ang0 = 0.0;    // Arc: angles, ang0 < ang1, measured ccw
    double ang1 = 0.0;
    std::string label;
    bool is_window = false;  // window pieces are excluded from cube/corona stats
    int cap_host = -1;       // >= 0 when the piece is an augmentation cap

    double length() const;
    Vec2 point_at(double arc) const;   // point at arclength from the start
    double nearest_arc(Vec2 p) const;  // arclength of the nearest point
    double distance(Vec2 p) const;
    Vec2 closest_point(Vec2 p) const;
    Box2 bbox() const;
    bool intersects_box(const Box2& box) const;  // exact predicate
};

Piece make_segment(Vec2 a, Vec2 b, std::string label, bool window = false);
Piece make_circle(Vec2 c, double r, std::string label, bool window = false);
Piece make_arc(Vec2 c, double r, double ang0, double ang1, std::string label);
Piece make_dot(Vec2 p, std::string label);

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

struct DomainParams {
    double alpha = 0.5;  // corkscrew constant
    double beta = 0.1;   // capacity density constant
    int d = 1;           // boundary dimension; ambient dimension is d+1
};

struct CantorSpec {
    double lambda = 0.25;  // in (0, 1/2)
    int level = 0;         // finite construction depth, >= 0
};

enum class DomainKind { CantorComplement, HalfPlaneWindow, Disc, CustomPieceUnion };

struct NearestHit {
    int piece = -1;
    double dist = 0.0;
    Vec2 point;  // closest boundary point
};

// A distance-queryable region of R^2 with an enumerable labeled boundary.
// Immutable after construction; queries are pure and thread-safe.
class Domain {
  public:
    DomainKind kind = DomainKind::CustomPieceUnion;
    std::vector<Piece> pieces;
    Ball window;  // bounding region
    DomainParams params;
    std::optional<CantorSpec> cantor;  // set for CantorComplement

    // Exact Euclidean distance from p to the boundary (0 on the boundary).
    // For Cantor domains this runs a pruned hierarchical descent that is
    // bit-identical to the brute-force minimum over all pieces.
    double distance(Vec2 p) const;
    double distance_bruteforce(Vec2 p) const;
    // distance to the core boundary only (window and caps excluded)
    double core_distance(Vec2 p) const;
    NearestHit nearest(Vec2 p) const;
    bool contains(Vec2 p) const;
    double diameter() const;  // diameter of Omega (window diameter)

    // Indices of non-window, non-cap pieces in canonical order.
    std::vector<int> core_piece_ids() const;

    // Appends absorbing cap arcs (augmentation) and reindexes the grid.
    void add_cap_pieces(const std::vector<Piece>& caps);

    // Cantor accessors for spatial range queries over the leaf squares.
    int cantor_leaf_count() const { return static_cast<int>(leaves_.size()); }
    int cantor_leaf_first_piece(int leaf) const {
        return leaves_[static_cast<std::size_t>(leaf)].first_piece;
    }
    // leaves whose closed square is within distance R of p
    void cantor_leaves_near(Vec2 p, double R, std::vector<int>& out) const;

  private:
    friend Domain make_cantor(const CantorSpec&, double);
    friend Domain make_half_plane_window(double);
    friend Domain make_disc(double, const std::vector<double>&);
    friend Domain make_custom(std::vector<Piece>, Ball, DomainParams);

    struct CantorNode {
        Vec2 corner;
        double side;
        int first_piece;  // for leaves: first of 4 side segments
    };
    // Implicit 4-ary tree; leaves carry piece ranges. Node boxes prune the
    // descent with a 1e-9 relative safety margin so pruning never discards
    // the exact minimizer.
    std::vector<CantorNode> leaves_;
    double lambda_ = 0.0;
    int level_ = 0;
    Vec2 root_corner_;
    double root_side_ = 0.0;

    // bounding-box tree over cap pieces (they can be numerous and tiny)
    struct CapNode {
        Box2 box;
        int left = -1, right = -1;   // children, or
        int first = -1, count = 0;   // leaf piece range (into cap_order_)
    };
    std::vector<CapNode> cap_nodes_;
    std::vector<int> cap_order_;
    int first_cap_piece_ = -1;

    double cantor_tree_distance(Vec2 p, double best, int* best_piece, Vec2* best_point) const;
    double cap_tree_distance(Vec2 p, double best, int* best_piece, Vec2* best_point) const;
    void rebuild_cap_index();
};

// Borel subset of the boundary named by piece ids, optionally clipped.
struct BoundaryRegion {
    std::vector<int> piece_ids;  // sorted, unique
    std::optional<Ball> clip;

    bool contains(const Domain& dom, int piece, Vec2 point) const;
    bool empty() const { return piece_ids.empty(); }

    static BoundaryRegion of_pieces(std::vector<int> ids, std::optional<Ball> clip = {});
    // All core pieces whose label starts with the prefix.
    static BoundaryRegion by_label_prefix(const Domain& dom, const std::string& prefix,
                                          std::optional<Ball> clip = {});
    static BoundaryRegion whole_boundary(const Domain& dom);
    static BoundaryRegion core_boundary(const Domain& dom);
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

// Omega = window \ K_{lambda,level}. Boundary pieces: 4 sides per level
// square, labeled by the square's address string, plus the window circle.
Domain make_cantor(const CantorSpec& spec, double window_radius);

// Upper half plane intersected with B(0, wr): core piece is the diameter
// segment, window piece the upper semicircle.
Domain make_half_plane_window(double window_radius);

// Disc of radius r about the origin; boundary split into labeled arcs at
// the given ccw angle breakpoints (empty -> single full circle).
Domain make_disc(double radius, const std::vector<double>& breakpoints = {});

Domain make_custom(std::vector<Piece> pieces, Ball window, DomainParams params);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Number of half-open grid cells of side tau (cell k = [k tau, (k+1) tau))
// meeting the region. Exact for segments/circles/dots; arcs are rasterized
// at chord step tau/8.
std::int64_t grid_cover_count(const Domain& dom, const BoundaryRegion& region, double tau);

// Certified interior ball B(p, alpha r) inside Omega and B(x, r). Analytic
// for half-plane and disc domains, deterministic grid search otherwise.
Ball corkscrew_witness(const Domain& dom, Vec2 x, double r);

// Best interior ball found near x at scale r: maximizes
// min(distance(p), r - |p - x|) over a deterministic refinement grid.
Ball best_interior_ball(const Domain& dom, Vec2 x, double r, int refine = 3);

// Checkerboard half of a Cantor domain's level squares (address digit sum
// parity), used as the harmonic-measure target in the dichotomy experiment.
BoundaryRegion cantor_checkerboard(const Domain& dom);

// JSON (de)serialization of domain specs:
// {kind, lambda, level, window_radius, alpha, beta}
std::string domain_spec_to_json(const Domain& dom);
Domain domain_from_spec_json(const std::string& json_text);

} // namespace hmlab
