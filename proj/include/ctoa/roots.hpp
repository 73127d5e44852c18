#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctoa/config.hpp"

namespace ctoa {

// Which characteristic equation a root list belongs to.
enum class RootEquation {
    generic,
    pi_half_even,
    pi_half_odd,
    periodic_even,
    periodic_odd
};

struct RootList {
    std::vector<double> roots;
    RootEquation equation = RootEquation::generic;
    double gamma = 0.0;
    double achieved_tolerance = 0.0;
};

struct ScanResult {
    std::vector<double> roots;
    double achieved_tolerance = 0.0;
};

// Scan (x_min, x_max] with a fixed step, bisect every sign change down to
// `tolerance`, stop after `count` roots. The default step is fine enough for
// every characteristic equation used here (root spacing is at least ~pi/2).
inline ScanResult find_roots(const std::function<double(double)>& f,
                             double x_max, int count, double tolerance,
                             double scan_step = pi / 16, double x_min = 1e-9) {
    if (count < 1) throw std::invalid_argument("find_roots: count must be >= 1");
    if (!(tolerance > 0)) throw std::invalid_argument("find_roots: tolerance must be positive");
    if (!(x_max > x_min)) throw std::invalid_argument("find_roots: empty scan interval");

    ScanResult result;
    double a = x_min;
    double fa = f(a);
    while (a < x_max && static_cast<int>(result.roots.size()) < count) {
        double b = std::min(a + scan_step, x_max);
        double fb = f(b);
        if (fa == 0.0) {
            result.roots.push_back(a);
            result.achieved_tolerance = std::max(result.achieved_tolerance, 0.0);
        } else if (fa * fb < 0.0) {
            double lo = a, hi = b, flo = fa;
            for (int iter = 0; iter < 200 && (hi - lo) > tolerance; ++iter) {
                double mid = 0.5 * (lo + hi);
                double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (flo * fm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            result.roots.push_back(0.5 * (lo + hi));
            result.achieved_tolerance = std::max(result.achieved_tolerance, hi - lo);
        }
        a = b;
        fa = fb;
    }
    if (static_cast<int>(result.roots.size()) < count)
        throw std::runtime_error("find_roots: found " +
                                 std::to_string(result.roots.size()) + " of " +
                                 std::to_string(count) + " roots below x_max");
    return result;
}

}  // namespace ctoa
