#pragma once

// Test-only oracles, independent of the library's estimation paths.

#include <cmath>
#include <functional>
#include <vector>

#include "hmlab/vec.hpp"

namespace hmlab::oracles {

// Finite-difference harmonic measure on the half-disc {y > 0} cap B(0, R):
// u = 1 on the axis segment [a, b], 0 on the rest of the boundary. 5-point
// Laplace with SOR; returns u at p.
inline double fd_halfdisc_measure(double R, double a, double b, Vec2 p, int n = 256,
                                  int iters = 4000) {
    double h = 2.0 * R / n;
    int ny = n / 2 + 1;
    auto inside = [&](int i, int j) {
        double x = -R + i * h, y = j * h;
        return j > 0 && x * x + y * y < R * R * (1.0 - 1e-12);
    };
    std::vector<double> u(static_cast<std::size_t>((n + 1) * ny), 0.0);
    auto at = [&](int i, int j) -> double& {
        return u[static_cast<std::size_t>(j * (n + 1) + i)];
    };
    // Dirichlet data on the axis
    for (int i = 0; i <= n; ++i) {
        double x = -R + i * h;
        at(i, 0) = (x >= a && x <= b) ? 1.0 : 0.0;
    }
    const double w = 1.9;  // SOR
    for (int it = 0; it < iters; ++it) {
        for (int j = 1; j < ny - 1; ++j) {
            for (int i = 1; i < n; ++i) {
                if (!inside(i, j)) continue;
                double up = inside(i, j + 1) || j + 1 == 0 ? at(i, j + 1) : 0.0;
                double dn = at(i, j - 1);
                double le = inside(i - 1, j) || i - 1 == 0 ? at(i - 1, j) : 0.0;
                double ri = inside(i + 1, j) ? at(i + 1, j) : 0.0;
                if (!inside(i - 1, j)) le = 0.0;
                if (!inside(i + 1, j)) ri = 0.0;
                if (!inside(i, j + 1)) up = 0.0;
                double target = 0.25 * (up + dn + le + ri);
                at(i, j) += w * (target - at(i, j));
            }
        }
    }
    int pi = static_cast<int>(std::lround((p.x + R) / h));
    int pj = static_cast<int>(std::lround(p.y / h));
    return at(pi, pj);
}

// Midpoint quadrature of f over the disc B(c, R) on an m x m grid.
inline double disc_quadrature(Vec2 c, double R, int m,
                              const std::function<double(Vec2)>& f) {
    double h = 2.0 * R / m;
    double sum = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Vec2 p{c.x - R + (i + 0.5) * h, c.y - R + (j + 0.5) * h};
            if (dist(p, c) <= R) sum += f(p);
        }
    return sum * h * h;
}

// Deterministic near-uniform nodes on the unit sphere in R^3 (golden spiral).
inline std::vector<std::vector<double>> sphere_nodes(int n, double radius) {
    std::vector<std::vector<double>> pts;
    const double ga = 2.39996322972865332;  // golden angle
    for (int k = 0; k < n; ++k) {
        double z = 1.0 - 2.0 * (k + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * k;
        pts.push_back({radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z});
    }
    return pts;
}

} // namespace hmlab::oracles
