#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ctoa {

// The five quarter-integer orders appearing in the characteristic equations
// and closed-form eigenfunctions.
enum class BesselOrder {
    minus_three_quarters,
    minus_one_quarter,
    one_quarter,
    three_quarters,
    five_quarters
};

inline double order_value(BesselOrder o) {
    switch (o) {
        case BesselOrder::minus_three_quarters: return -0.75;
        case BesselOrder::minus_one_quarter: return -0.25;
        case BesselOrder::one_quarter: return 0.25;
        case BesselOrder::three_quarters: return 0.75;
        case BesselOrder::five_quarters: return 1.25;
    }
    throw std::invalid_argument("unknown Bessel order");
}

namespace detail {

// Gamma(1/4) and Gamma(3/4); every Gamma(nu+1) needed below follows from
// these two by the functional equation.
inline constexpr double gamma_one_quarter = 3.625609908221908311931;
inline constexpr double gamma_three_quarters = 1.225416702465177645129;

inline double gamma_nu_plus_1(double nu) {
    if (nu == -0.75) return gamma_one_quarter;
    if (nu == -0.25) return gamma_three_quarters;
    if (nu == 0.25) return 0.25 * gamma_one_quarter;
    if (nu == 0.75) return 0.75 * gamma_three_quarters;
    if (nu == 1.25) return 1.25 * 0.25 * gamma_one_quarter;
    throw std::invalid_argument("gamma_nu_plus_1: unsupported order");
}

// Sum of the alternating power series for J_nu(x) / ((x/2)^nu / Gamma(nu+1)).
inline double bessel_series_sum(double nu, double x) {
    double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 200; ++k) {
        term *= -q / ((k + 1) * (nu + k + 1));
        sum += term;
        if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

inline double bessel_series(double nu, double x) {
    return std::pow(0.5 * x, nu) / gamma_nu_plus_1(nu) * bessel_series_sum(nu, x);
}

// Miller backward recurrence for the chain J_{nu0 + j}(x), j = 0, 1.
// Normalization uses the Neumann-type sum over even lattice indices.
inline void bessel_miller(double nu0, double x, double& j0, double& j1) {
    int start = static_cast<int>(std::ceil(x + 15.0 * std::cbrt(x) + 20.0));
    if (start % 2 == 1) ++start;
    std::vector<double> y(start + 2, 0.0);
    y[start + 1] = 0.0;
    y[start] = 1e-30;
    for (int m = start; m >= 1; --m) {
        y[m - 1] = (2.0 * (nu0 + m) / x) * y[m] - y[m + 1];
        if (std::fabs(y[m - 1]) > 1e250) {
            for (int j = m - 1; j <= start + 1; ++j) y[j] *= 1e-250;
        }
    }
    double weight = 1.0, sum = 0.0;
    for (int k = 0; 2 * k <= start; ++k) {
        sum += weight * y[2 * k];
        weight *= (nu0 + 2 * k + 2) * (nu0 + k) / ((nu0 + 2 * k) * (k + 1));
    }
    double scale = std::pow(0.5 * x, nu0) / (gamma_nu_plus_1(nu0) * sum);
    j0 = y[0] * scale;
    j1 = y[1] * scale;
}

}  // namespace detail

// J_nu(x) for the five supported orders, 0 < x <= 500 by contract.
// Below x = 10 the power series converges quickly; above, two Miller chains
// based at nu0 = 1/4 and 3/4 cover all five orders via one downward step.
inline double bessel_j(BesselOrder order, double x) {
    if (!(x > 0)) throw std::invalid_argument("bessel_j requires x > 0");
    double nu = order_value(order);
    if (x < 10.0) return detail::bessel_series(nu, x);

    double j0 = 0, j1 = 0;
    switch (order) {
        case BesselOrder::one_quarter:
            detail::bessel_miller(0.25, x, j0, j1);
            return j0;
        case BesselOrder::five_quarters:
            detail::bessel_miller(0.25, x, j0, j1);
            return j1;
        case BesselOrder::minus_three_quarters:
            detail::bessel_miller(0.25, x, j0, j1);
            return (0.5 / x) * j0 - j1;
        case BesselOrder::three_quarters:
            detail::bessel_miller(0.75, x, j0, j1);
            return j0;
        case BesselOrder::minus_one_quarter:
            detail::bessel_miller(0.75, x, j0, j1);
            return (1.5 / x) * j0 - j1;
    }
    throw std::invalid_argument("unknown Bessel order");
}

}  // namespace ctoa
