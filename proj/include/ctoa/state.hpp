#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ctoa/basis.hpp"
#include "ctoa/grid.hpp"

namespace ctoa {

enum class Representation { position_sampled, momentum_coefficients };

// A wavefunction either as samples on a quadrature grid (norm via the grid
// weights) or as coefficients over a momentum index set (norm is the
// Euclidean norm). The cached norm is refreshed by the constructors below
// and by normalize().
struct StateVector {
    Representation representation = Representation::momentum_coefficients;
    std::vector<std::complex<double>> amplitudes;
    double norm = 0.0;
};

inline double state_norm(const std::vector<std::complex<double>>& amps,
                         const PositionGrid* grid) {
    double s = 0.0;
    if (grid) {
        if (static_cast<int>(amps.size()) != grid->size())
            throw std::invalid_argument("state_norm: sample count does not match grid");
        for (int i = 0; i < grid->size(); ++i)
            s += grid->weights[i] * std::norm(amps[i]);
    } else {
        for (const auto& a : amps) s += std::norm(a);
    }
    return std::sqrt(s);
}

inline StateVector make_position_state(std::vector<std::complex<double>> samples,
                                       const PositionGrid& grid) {
    StateVector st;
    st.representation = Representation::position_sampled;
    st.amplitudes = std::move(samples);
    st.norm = state_norm(st.amplitudes, &grid);
    return st;
}

inline StateVector make_momentum_state(std::vector<std::complex<double>> coeffs) {
    StateVector st;
    st.representation = Representation::momentum_coefficients;
    st.amplitudes = std::move(coeffs);
    st.norm = state_norm(st.amplitudes, nullptr);
    return st;
}

// Rescales to unit norm. Position-sampled states need the grid that defines
// their inner product.
inline void normalize(StateVector& st, const PositionGrid* grid = nullptr) {
    if (st.representation == Representation::position_sampled && grid == nullptr)
        throw std::invalid_argument("normalize: position-sampled state needs its grid");
    double n = state_norm(st.amplitudes,
                          st.representation == Representation::position_sampled ? grid : nullptr);
    if (!(n > 0))
        throw std::invalid_argument("normalize: state has zero norm");
    for (auto& a : st.amplitudes) a /= n;
    st.norm = 1.0;
}

// Projection <phi_n|psi> by quadrature for every n in the index set.
inline StateVector to_momentum(const StateVector& st, const PositionGrid& grid,
                               const MomentumIndexSet& modes, const SystemConfig& cfg) {
    if (st.representation != Representation::position_sampled)
        throw std::invalid_argument("to_momentum: state is already momentum-space");
    if (static_cast<int>(st.amplitudes.size()) != grid.size())
        throw std::invalid_argument("to_momentum: sample count does not match grid");
    std::vector<std::complex<double>> coeffs(modes.size());
    for (int a = 0; a < modes.size(); ++a) {
        int n = modes.index_at(a);
        std::complex<double> acc = 0.0;
        for (int i = 0; i < grid.size(); ++i) {
            acc += grid.weights[i] *
                   std::conj(basis_function(n, grid.nodes[i], cfg)) *
                   st.amplitudes[i];
        }
        coeffs[a] = acc;
    }
    return make_momentum_state(std::move(coeffs));
}

inline StateVector to_position(const StateVector& st, const PositionGrid& grid,
                               const MomentumIndexSet& modes, const SystemConfig& cfg) {
    if (st.representation != Representation::momentum_coefficients)
        throw std::invalid_argument("to_position: state is already position-space");
    if (static_cast<int>(st.amplitudes.size()) != modes.size())
        throw std::invalid_argument("to_position: coefficient count does not match index set");
    std::vector<std::complex<double>> samples(grid.size(), 0.0);
    for (int a = 0; a < modes.size(); ++a) {
        int n = modes.index_at(a);
        for (int i = 0; i < grid.size(); ++i)
            samples[i] += st.amplitudes[a] * basis_function(n, grid.nodes[i], cfg);
    }
    return make_position_state(std::move(samples), grid);
}

}  // namespace ctoa
