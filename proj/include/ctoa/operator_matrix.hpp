#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ctoa/basis.hpp"
#include "ctoa/classify.hpp"
#include "ctoa/grid.hpp"
#include "ctoa/kernels.hpp"
#include "ctoa/state.hpp"

namespace ctoa {

// <phi_m| q |phi_n> in the momentum basis: independent of gamma.
inline std::complex<double> position_matrix_element(int m, int n,
                                                    const SystemConfig& cfg) {
    if (m == n) return 0.0;
    int d = n - m;
    double sign = (d % 2 == 0) ? 1.0 : -1.0;
    return std::complex<double>(0.0, -cfg.length_l * sign / (pi * d));
}

// <phi_m| q^2 |phi_n>
inline double position_squared_matrix_element(int m, int n,
                                              const SystemConfig& cfg) {
    double l2 = cfg.length_l * cfg.length_l;
    if (m == n) return l2 / 3.0;
    int d = n - m;
    double sign = (d % 2 == 0) ? 1.0 : -1.0;
    return 2.0 * l2 * sign / (pi * pi * d * d);
}

struct HermitianOperatorMatrix {
    enum class Basis { momentum_spectral, position_nystrom };
    Basis basis = Basis::momentum_spectral;
    MomentumIndexSet modes;  // meaningful for the spectral basis
    Eigen::MatrixXcd entries;

    int dimension() const { return static_cast<int>(entries.rows()); }
};

// Checks the anti-Hermitian defect and symmetrizes the remainder away.
inline HermitianOperatorMatrix make_hermitian(HermitianOperatorMatrix::Basis basis,
                                              MomentumIndexSet modes,
                                              Eigen::MatrixXcd entries) {
    double defect = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-10)
        throw std::invalid_argument("make_hermitian: defect " + std::to_string(defect) +
                                    " exceeds 1e-10");
    HermitianOperatorMatrix op;
    op.basis = basis;
    op.modes = modes;
    op.entries = 0.5 * (entries + entries.adjoint().eval());
    return op;
}

// Closed-form arrival-time matrix over the full ladder |n| <= N:
// T_mn = (i mu l^2 / (2 hbar pi)) (-1)^(n-m) / (n-m) * (s_m + s_n), zero on
// the diagonal, with s_k the reciprocal of the dimensionless momentum
// gamma + k pi. The periodic case keeps the n = 0 column and row through the
// pseudo-inverse convention s_0 = 0; dropping the mode entirely degrades the
// low-lying spectrum by an order of magnitude.
inline HermitianOperatorMatrix matrix_spectral(const SystemConfig& cfg) {
    int N = cfg.basis_cutoff_N;
    int dim = 2 * N + 1;
    bool periodic = cfg.is_periodic();
    std::vector<double> s(dim);
    for (int a = 0; a < dim; ++a) {
        int k = a - N;
        double x = cfg.gamma + k * pi;
        s[a] = (periodic && k == 0) ? 0.0 : 1.0 / x;
    }
    double coef = cfg.mass_mu * cfg.length_l * cfg.length_l / (2.0 * cfg.hbar * pi);
    Eigen::MatrixXcd T(dim, dim);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            if (a == b) {
                T(a, b) = 0.0;
                continue;
            }
            int d = b - a;
            double sign = (d % 2 == 0) ? 1.0 : -1.0;
            T(a, b) = std::complex<double>(0.0, coef * sign / d * (s[a] + s[b]));
        }
    }
    return make_hermitian(HermitianOperatorMatrix::Basis::momentum_spectral,
                          MomentumIndexSet{N, false}, std::move(T));
}

// Symmetrized Nystrom discretization A = W^(1/2) K W^(1/2) on the grid.
inline HermitianOperatorMatrix matrix_nystrom(const SystemConfig& cfg,
                                              const PositionGrid& grid,
                                              KernelKind kind) {
    int M = grid.size();
    Eigen::MatrixXcd A(M, M);
    std::vector<double> sw(M);
    for (int i = 0; i < M; ++i) sw[i] = std::sqrt(grid.weights[i]);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            A(i, j) = sw[i] * sw[j] * kernel_value(kind, grid.nodes[i], grid.nodes[j], cfg);
    return make_hermitian(HermitianOperatorMatrix::Basis::position_nystrom,
                          MomentumIndexSet{}, std::move(A));
}

// Integral of |K|^2 over the square, by the grid quadrature. On the
// diagonal, which has measure zero, the integrand takes its one-sided limit
// rather than the averaged step value; with that convention the integrand is
// smooth away from the periodic-case kink and the quadrature is stable.
inline double kernel_density_limit(KernelKind kind, double q, const SystemConfig& cfg) {
    if (kind == KernelKind::periodic) {
        double v = cfg.mass_mu * q / (2.0 * cfg.hbar);
        return v * v;
    }
    double v = cfg.mass_mu * q / (2.0 * cfg.hbar * std::sin(cfg.gamma));
    return v * v;
}

inline double hilbert_schmidt_norm(KernelKind kind, const SystemConfig& cfg,
                                   const PositionGrid& grid) {
    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        double row = 0.0;
        for (int j = 0; j < grid.size(); ++j) {
            double f = i == j ? kernel_density_limit(kind, grid.nodes[i], cfg)
                              : std::norm(kernel_value(kind, grid.nodes[i],
                                                       grid.nodes[j], cfg));
            row += grid.weights[j] * f;
        }
        acc += grid.weights[i] * row;
    }
    return acc;
}

struct EigenPair {
    double eigenvalue = 0.0;
    StateVector eigenfunction;
    int quantum_number = 0;  // 1-based rank within its branch, decreasing |tau|
    Branch branch = Branch::plus;
    ParityTag parity = ParityTag::none;
    NodalTag nodal = NodalTag::non_nodal;
};

// Full Hermitian diagonalization, returned as +-paired EigenPairs ranked by
// decreasing |tau|. Exact-zero artifacts of the odd matrix dimension are
// dropped. The grid provides position samples for parity and nodal tags;
// classification is tolerant here, callers wanting a strict nodal check can
// reclassify. max_pairs bounds the classification work.
inline std::vector<EigenPair> diagonalize(const HermitianOperatorMatrix& op,
                                          const SystemConfig& cfg,
                                          const PositionGrid& grid,
                                          int max_pairs = 32) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.entries);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigensolver failed");
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    int dim = op.dimension();

    double max_abs = 0.0;
    for (int i = 0; i < dim; ++i) max_abs = std::max(max_abs, std::fabs(vals(i)));
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double fa = std::fabs(vals(a)), fb = std::fabs(vals(b));
        if (fa != fb) return fa > fb;
        return vals(a) > vals(b);
    });
    while (!order.empty() && std::fabs(vals(order.back())) <= 1e-12 * max_abs)
        order.pop_back();

    bool spectral = op.basis == HermitianOperatorMatrix::Basis::momentum_spectral;
    int M = grid.size();

    // Basis sample matrix for converting spectral eigenvectors to position
    // samples, built once.
    Eigen::MatrixXcd phi;
    if (spectral) {
        phi.resize(M, dim);
        for (int a = 0; a < dim; ++a) {
            int n = op.modes.index_at(a);
            for (int i = 0; i < M; ++i)
                phi(i, a) = basis_function(n, grid.nodes[i], cfg);
        }
    }

    int pair_count = static_cast<int>(order.size()) / 2;
    if (max_pairs >= 0) pair_count = std::min(pair_count, max_pairs);

    std::vector<EigenPair> pairs;
    pairs.reserve(2 * pair_count);
    for (int k = 0; k < pair_count; ++k) {
        for (int half = 0; half < 2; ++half) {
            int col = order[2 * k + half];
            Eigen::VectorXcd v = vecs.col(col);

            int imax = 0;
            double best = -1.0;
            for (int i = 0; i < dim; ++i) {
                double m = std::abs(v(i));
                if (m > best) {
                    best = m;
                    imax = i;
                }
            }
            v *= std::conj(v(imax)) / std::abs(v(imax));

            EigenPair pair;
            pair.eigenvalue = vals(col);
            pair.quantum_number = k + 1;
            pair.branch = vals(col) >= 0 ? Branch::plus : Branch::minus;

            StateVector position_state;
            if (spectral) {
                std::vector<std::complex<double>> coeffs(v.data(), v.data() + dim);
                pair.eigenfunction = make_momentum_state(std::move(coeffs));
                Eigen::VectorXcd samples = phi * v;
                std::vector<std::complex<double>> s(samples.data(), samples.data() + M);
                position_state = make_position_state(std::move(s), grid);
            } else {
                if (M != dim)
                    throw std::invalid_argument("diagonalize: grid does not match Nystrom matrix");
                std::vector<std::complex<double>> s(dim);
                for (int i = 0; i < dim; ++i)
                    s[i] = v(i) / std::sqrt(grid.weights[i]);
                pair.eigenfunction = make_position_state(std::move(s), grid);
                position_state = pair.eigenfunction;
            }

            Classification cls = classify(position_state, grid, cfg, false);
            pair.parity = cls.parity;
            pair.nodal = cls.nodal;
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

// Convenience: the positive-branch eigenvalues ranked 1..K.
inline std::vector<double> plus_branch_eigenvalues(const std::vector<EigenPair>& pairs,
                                                   int K) {
    std::vector<double> out;
    for (const auto& p : pairs)
        if (p.branch == Branch::plus && p.quantum_number <= K)
            out.push_back(p.eigenvalue);
    std::sort(out.begin(), out.end(), std::greater<double>());
    if (static_cast<int>(out.size()) < K)
        throw std::runtime_error("plus_branch_eigenvalues: fewer pairs than requested");
    return out;
}

}  // namespace ctoa
