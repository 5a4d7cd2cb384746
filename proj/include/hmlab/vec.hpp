#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace hmlab {

// Planar point/vector. All domain experiments live in R^2 (d = 1 boundary
// dimension); higher-dimensional Riesz formulas use PointN below.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double t) const { return {x * t, y * t}; }
    Vec2 operator/(double t) const { return {x / t, y / t}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double t, Vec2 v) { return v * t; }
inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline double dist2(Vec2 a, Vec2 b) { return (a - b).norm2(); }

// General-dimension point for the d >= 2 Riesz potential formulas.
using PointN = std::vector<double>;

inline double distN(const PointN& a, const PointN& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Ball {
    Vec2 center;
    double radius = 0.0;

    bool contains(Vec2 p) const { return dist(p, center) < radius; }
    bool contains_closed(Vec2 p) const { return dist(p, center) <= radius; }
};

// Closed axis-aligned box, used for dyadic cubes and bounding boxes.
struct Box2 {
    Vec2 lo;
    Vec2 hi;

    Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    bool contains(Vec2 p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    // Euclidean distance from p to the closed box (0 inside).
    double exterior_dist(Vec2 p) const {
        double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
        double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
        return std::hypot(dx, dy);
    }
    double farthest_dist(Vec2 p) const {
        double dx = std::max(std::abs(p.x - lo.x), std::abs(p.x - hi.x));
        double dy = std::max(std::abs(p.y - lo.y), std::abs(p.y - hi.y));
        return std::hypot(dx, dy);
    }
    bool intersects(const Box2& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
    Box2 dilated(double factor) const {
        Vec2 c = center();
        double hx = (hi.x - lo.x) * 0.5 * factor;
        double hy = (hi.y - lo.y) * 0.5 * factor;
        return {{c.x - hx, c.y - hy}, {c.x + hx, c.y + hy}};
    }
    bool meets_ball(const Ball& b) const { return exterior_dist(b.center) <= b.radius; }
};

// Dyadic cube at level n with integer index (kx, ky) and grid unit tau:
// side = tau * 2^{-n}, corner = index * side.
struct DyadicCube {
    int level = 0;
    std::int64_t kx = 0;
    std::int64_t ky = 0;
    double tau = 1.0;

    double side() const { return tau * std::ldexp(1.0, -level); }
    Box2 box() const {
        double s = side();
        Vec2 lo{static_cast<double>(kx) * s, static_cast<double>(ky) * s};
        return {lo, {lo.x + s, lo.y + s}};
    }
    DyadicCube parent() const {
        auto half = [](std::int64_t k) { return k >= 0 ? k / 2 : (k - 1) / 2; };
        return {level - 1, half(kx), half(ky), tau};
    }
    DyadicCube child(int cx, int cy) const {
        return {level + 1, 2 * kx + cx, 2 * ky + cy, tau};
    }
    bool operator==(const DyadicCube&) const = default;
};

} // namespace hmlab
