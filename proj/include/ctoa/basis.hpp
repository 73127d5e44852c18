#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ctoa/config.hpp"

namespace ctoa {

// Doubly infinite momentum ladder truncated at |n| <= N. In the periodic
// case the n = 0 mode carries zero momentum and is excluded from every
// construction that divides by p_n; the operator matrix handles it through
// a pseudo-inverse convention instead.
struct MomentumIndexSet {
    int cutoff_N = 0;
    bool zero_excluded = false;

    int size() const { return 2 * cutoff_N + 1 - (zero_excluded ? 1 : 0); }

    // Enumeration order is ascending n.
    int index_at(int pos) const {
        if (pos < 0 || pos >= size())
            throw std::out_of_range("MomentumIndexSet: position out of range");
        int n = pos - cutoff_N;
        if (zero_excluded && n >= 0) ++n;
        return n;
    }

    bool contains(int n) const {
        if (n < -cutoff_N || n > cutoff_N) return false;
        return !(zero_excluded && n == 0);
    }

    int position_of(int n) const {
        if (!contains(n))
            throw std::out_of_range("MomentumIndexSet: index not in set");
        int pos = n + cutoff_N;
        if (zero_excluded && n > 0) --pos;
        return pos;
    }
};

inline MomentumIndexSet make_index_set(const SystemConfig& cfg) {
    return MomentumIndexSet{cfg.basis_cutoff_N, cfg.is_periodic()};
}

// Recover the index set a coefficient vector was built over. An odd count is
// a full ladder (used by the spectral matrix, which keeps n = 0 even in the
// periodic case); an even count is the zero-excluded periodic set.
inline MomentumIndexSet infer_index_set(std::size_t count, const SystemConfig& cfg) {
    if (count % 2 == 1)
        return MomentumIndexSet{static_cast<int>((count - 1) / 2), false};
    if (cfg.is_periodic() && count >= 2)
        return MomentumIndexSet{static_cast<int>(count / 2), true};
    throw std::invalid_argument(
        "infer_index_set: even coefficient count requires the periodic case");
}

// p_n = hbar (gamma + n pi) / l
inline double momentum_eigenvalue(int n, const SystemConfig& cfg) {
    if (n == 0 && cfg.is_periodic())
        throw std::invalid_argument("momentum_eigenvalue: n = 0 has zero momentum when gamma = 0");
    return cfg.hbar * (cfg.gamma + n * pi) / cfg.length_l;
}

inline double energy_eigenvalue(int n, const SystemConfig& cfg) {
    double p = cfg.hbar * (cfg.gamma + n * pi) / cfg.length_l;
    return p * p / (2.0 * cfg.mass_mu);
}

// phi_n(q) = (2l)^(-1/2) exp(i p_n q / hbar), the twisted-boundary
// eigenfunctions phi(-l) = exp(-2 i gamma) phi(l).
inline std::complex<double> basis_function(int n, double q, const SystemConfig& cfg) {
    double phase = (cfg.gamma + n * pi) * q / cfg.length_l;
    double amp = 1.0 / std::sqrt(2.0 * cfg.length_l);
    return std::complex<double>(amp * std::cos(phase), amp * std::sin(phase));
}

}  // namespace ctoa
