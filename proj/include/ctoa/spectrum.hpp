#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ctoa/bessel.hpp"
#include "ctoa/classify.hpp"
#include "ctoa/config.hpp"
#include "ctoa/grid.hpp"
#include "ctoa/roots.hpp"
#include "ctoa/state.hpp"

namespace ctoa {

enum class SpectralCase { generic, pi_half, periodic };

// Dispatch on the exact stored phase; the "pi/2" and "0" tokens produce
// exactly these values, anything else takes the generic route.
inline SpectralCase spectral_case_for(double gamma) {
    if (gamma == 0.0) return SpectralCase::periodic;
    if (gamma == pi / 2 || gamma == -pi / 2) return SpectralCase::pi_half;
    return SpectralCase::generic;
}

// Left-hand side of the characteristic equation in the rescaled variable x.
// The generic form is multiplied by x to regularize the product of the
// negative-order functions near the origin.
inline double characteristic_value(double x, RootEquation eq, double gamma = 0.0) {
    if (!(x > 0)) throw std::invalid_argument("characteristic_value requires x > 0");
    switch (eq) {
        case RootEquation::generic: {
            double sg = std::sin(gamma), cg = std::cos(gamma);
            double even_part = bessel_j(BesselOrder::minus_three_quarters, x) *
                               bessel_j(BesselOrder::minus_one_quarter, x);
            double odd_part = bessel_j(BesselOrder::three_quarters, x) *
                              bessel_j(BesselOrder::one_quarter, x);
            return x * (sg * sg * even_part - cg * cg * odd_part);
        }
        case RootEquation::pi_half_even:
            return bessel_j(BesselOrder::minus_three_quarters, x);
        case RootEquation::pi_half_odd:
        case RootEquation::periodic_odd:
            return bessel_j(BesselOrder::minus_one_quarter, x);
        case RootEquation::periodic_even:
            return bessel_j(BesselOrder::minus_three_quarters, x) +
                   (2.0 / 3.0) * bessel_j(BesselOrder::five_quarters, x) +
                   bessel_j(BesselOrder::one_quarter, x) / x;
    }
    throw std::invalid_argument("unknown root equation");
}

inline RootList equation_roots(RootEquation eq, const SystemConfig& cfg, int count) {
    double x_max = (count + 6) * pi;
    auto f = [&](double x) { return characteristic_value(x, eq, cfg.gamma); };
    ScanResult scan = find_roots(f, x_max, count, cfg.root_tolerance);
    RootList list;
    list.roots = std::move(scan.roots);
    list.equation = eq;
    list.gamma = cfg.gamma;
    list.achieved_tolerance = scan.achieved_tolerance;
    return list;
}

// One line of the arrival-time spectrum: the n-th scaled root r together
// with the eigenvalue pair tau = +-(mu l^2 / 4 hbar) / r. family_index is
// the 1-based rank within the parity family where families exist.
struct SpectralLine {
    int n = 0;
    double r = 0.0;
    double tau_plus = 0.0;
    double tau_minus = 0.0;
    ParityTag parity = ParityTag::none;
    int family_index = 0;
};

inline double tau_from_root(double r, const SystemConfig& cfg) {
    return cfg.mass_mu * cfg.length_l * cfg.length_l / (4.0 * cfg.hbar * r);
}

// First K lines, merged across parity families for the symmetric phases and
// ranked by increasing r, i.e. decreasing |tau|.
inline std::vector<SpectralLine> spectrum(const SystemConfig& cfg, int K) {
    if (K < 1) throw std::invalid_argument("spectrum: K must be >= 1");
    std::vector<SpectralLine> lines;
    SpectralCase sc = spectral_case_for(cfg.gamma);
    if (sc == SpectralCase::generic) {
        RootList rl = equation_roots(RootEquation::generic, cfg, K);
        for (int i = 0; i < K; ++i) {
            SpectralLine line;
            line.n = i + 1;
            line.r = rl.roots[i];
            line.tau_plus = tau_from_root(line.r, cfg);
            line.tau_minus = -line.tau_plus;
            line.family_index = i + 1;
            lines.push_back(line);
        }
        return lines;
    }
    RootEquation even_eq = sc == SpectralCase::pi_half ? RootEquation::pi_half_even
                                                       : RootEquation::periodic_even;
    RootEquation odd_eq = sc == SpectralCase::pi_half ? RootEquation::pi_half_odd
                                                      : RootEquation::periodic_odd;
    RootList even = equation_roots(even_eq, cfg, K);
    RootList odd = equation_roots(odd_eq, cfg, K);
    std::size_t ie = 0, io = 0;
    while (static_cast<int>(lines.size()) < K) {
        bool take_even = io >= odd.roots.size() ||
                         (ie < even.roots.size() && even.roots[ie] < odd.roots[io]);
        SpectralLine line;
        line.n = static_cast<int>(lines.size()) + 1;
        if (take_even) {
            line.r = even.roots[ie++];
            line.parity = ParityTag::even;
            line.family_index = static_cast<int>(ie);
        } else {
            line.r = odd.roots[io++];
            line.parity = ParityTag::odd;
            line.family_index = static_cast<int>(io);
        }
        line.tau_plus = tau_from_root(line.r, cfg);
        line.tau_minus = -line.tau_plus;
        lines.push_back(line);
    }
    return lines;
}

inline SpectralLine spectral_line(const SystemConfig& cfg, int n) {
    return spectrum(cfg, n).back();
}

namespace detail {

// x^nu (J_{-nu}(x) + s i J_rho(x)) for the order pairs (3/4, 1/4) and
// (1/4, 3/4); nu + rho = 1 in both. Below x = 1e-6 the product form is
// replaced by the power series, which stays finite at x = 0 where the
// negative-order factor alone diverges.
inline std::complex<double> bessel_mix(double nu, double rho,
                                       BesselOrder neg_order, BesselOrder rho_order,
                                       double x, double s) {
    if (x < 1e-6) {
        double re = std::pow(2.0, nu) / gamma_nu_plus_1(-nu) * bessel_series_sum(-nu, x);
        double im = s * x * std::pow(2.0, -rho) / gamma_nu_plus_1(rho) *
                    bessel_series_sum(rho, x);
        return {re, im};
    }
    double scale = std::pow(x, nu);
    return {scale * bessel_j(neg_order, x), s * scale * bessel_j(rho_order, x)};
}

inline std::complex<double> mix_34_14(double x, double s) {
    return bessel_mix(0.75, 0.25, BesselOrder::minus_three_quarters,
                      BesselOrder::one_quarter, x, s);
}

inline std::complex<double> mix_14_34(double x, double s) {
    return bessel_mix(0.25, 0.75, BesselOrder::minus_one_quarter,
                      BesselOrder::three_quarters, x, s);
}

}  // namespace detail

// Unnormalized closed-form eigenfunction at position q. The branch enters
// only through conjugation of the phase factors, so the minus-branch value
// is the conjugate of the plus-branch one at the same q.
inline std::complex<double> eigenfunction_value(const SystemConfig& cfg,
                                                const SpectralLine& line,
                                                Branch branch, double q) {
    double l = cfg.length_l;
    double r = line.r;
    double x = r * q * q / (l * l);
    double s = branch == Branch::plus ? -1.0 : 1.0;
    std::complex<double> expo(std::cos(x), s * std::sin(x));

    SpectralCase sc = spectral_case_for(cfg.gamma);
    if (sc == SpectralCase::generic) {
        double cot = std::cos(cfg.gamma) / std::sin(cfg.gamma);
        double c_even = bessel_j(BesselOrder::minus_one_quarter, r) -
                        cot * bessel_j(BesselOrder::three_quarters, r);
        double c_odd = bessel_j(BesselOrder::minus_three_quarters, r) -
                       cot * bessel_j(BesselOrder::one_quarter, r);
        std::complex<double> even_term = detail::mix_34_14(x, s) * c_even;
        std::complex<double> odd_term =
            (-s) * (q * std::sqrt(r) / l) * detail::mix_14_34(x, s) * c_odd;
        return expo * (even_term + odd_term);
    }
    if (line.parity == ParityTag::odd) {
        return expo * (q * std::sqrt(r) / l) * detail::mix_14_34(x, s);
    }
    if (sc == SpectralCase::pi_half) {
        return expo * detail::mix_34_14(x, s);
    }
    // periodic even family, additive constant kept in its published form
    std::complex<double> ring_phase(std::cos(r), s * std::sin(r));
    std::complex<double> constant =
        4.0 * ring_phase * bessel_j(BesselOrder::one_quarter, r) /
        std::pow(4.0 * r, 0.25);
    return expo * detail::mix_34_14(x, s) + constant;
}

// Raw samples on the grid; the cached norm is the quadrature norm of the
// unnormalized closed form, which is the normalization amplitude 1/A.
inline StateVector sample_eigenfunction_raw(const SystemConfig& cfg,
                                            const SpectralLine& line,
                                            Branch branch,
                                            const PositionGrid& grid) {
    std::vector<std::complex<double>> samples(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        samples[i] = eigenfunction_value(cfg, line, branch, grid.nodes[i]);
    return make_position_state(std::move(samples), grid);
}

inline StateVector sample_eigenfunction(const SystemConfig& cfg,
                                        const SpectralLine& line, Branch branch,
                                        const PositionGrid& grid) {
    StateVector st = sample_eigenfunction_raw(cfg, line, branch, grid);
    normalize(st, &grid);
    return st;
}

}  // namespace ctoa
