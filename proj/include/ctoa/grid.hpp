#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctoa/config.hpp"

namespace ctoa {

// Gauss-Legendre quadrature on [-l, l]. Nodes are strictly increasing and
// exactly mirror-symmetric about the origin; weights are positive.
struct PositionGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double half_width = 0.0;

    int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

// Legendre P_M and derivative at x by the three-term recurrence.
inline void legendre_pair(int M, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= M; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = M * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

inline PositionGrid build_grid(int M, double half_width) {
    if (M < 16) throw std::invalid_argument("grid_points must be at least 16");
    if (!(half_width > 0)) throw std::invalid_argument("half_width must be positive");

    PositionGrid grid;
    grid.half_width = half_width;
    grid.nodes.resize(M);
    grid.weights.resize(M);

    for (int i = 0; i < M / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (M + 0.5));
        double p = 0, dp = 1;
        for (int iter = 0; iter < 100; ++iter) {
            detail::legendre_pair(M, x, p, dp);
            double dx = p / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        detail::legendre_pair(M, x, p, dp);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the (i+1)-th node counted from +1 downward.
        grid.nodes[M - 1 - i] = half_width * x;
        grid.nodes[i] = -half_width * x;
        grid.weights[M - 1 - i] = half_width * w;
        grid.weights[i] = half_width * w;
    }
    if (M % 2 == 1) {
        double p = 0, dp = 1;
        detail::legendre_pair(M, 0.0, p, dp);
        grid.nodes[M / 2] = 0.0;
        grid.weights[M / 2] = half_width * 2.0 / (dp * dp);
    }
    return grid;
}

inline PositionGrid build_grid(const SystemConfig& cfg) {
    return build_grid(cfg.grid_points_M, cfg.length_l);
}

}  // namespace ctoa
