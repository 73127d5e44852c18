#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ctoa/config.hpp"

namespace ctoa {

enum class KernelKind { nonperiodic, periodic };

inline KernelKind kernel_kind_for(const SystemConfig& cfg) {
    return cfg.is_periodic() ? KernelKind::periodic : KernelKind::nonperiodic;
}

// Integral kernel of the confined arrival-time operator for gamma != 0.
// The Heaviside step takes the symmetric value 1/2 on the diagonal, which
// makes the diagonal real and the kernel Hermitian.
inline std::complex<double> kernel_nonperiodic(double q, double qp,
                                               const SystemConfig& cfg) {
    if (cfg.is_periodic())
        throw std::invalid_argument("kernel_nonperiodic: gamma = 0 uses the periodic kernel");
    double h = q > qp ? 1.0 : (q < qp ? 0.0 : 0.5);
    std::complex<double> step =
        h * std::complex<double>(std::cos(cfg.gamma), std::sin(cfg.gamma)) +
        (1.0 - h) * std::complex<double>(std::cos(cfg.gamma), -std::sin(cfg.gamma));
    double prefactor = -cfg.mass_mu * (q + qp) / (4.0 * cfg.hbar * std::sin(cfg.gamma));
    return prefactor * step;
}

// Periodic-case kernel: the antisymmetric step part plus a boundary term
// that restores Hermiticity on the ring. sgn(0) = 0.
inline std::complex<double> kernel_periodic(double q, double qp,
                                            const SystemConfig& cfg) {
    double sgn = q > qp ? 1.0 : (q < qp ? -1.0 : 0.0);
    double real_part = (q + qp) * sgn - (q * q - qp * qp) / cfg.length_l;
    return std::complex<double>(0.0, -cfg.mass_mu / (4.0 * cfg.hbar) * real_part);
}

inline std::complex<double> kernel_value(KernelKind kind, double q, double qp,
                                         const SystemConfig& cfg) {
    return kind == KernelKind::periodic ? kernel_periodic(q, qp, cfg)
                                        : kernel_nonperiodic(q, qp, cfg);
}

}  // namespace ctoa
