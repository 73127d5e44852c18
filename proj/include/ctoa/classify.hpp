#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ctoa/grid.hpp"
#include "ctoa/state.hpp"

namespace ctoa {

enum class ParityTag { even, odd, none };
enum class NodalTag { nodal, non_nodal };
enum class Branch { plus, minus };

struct Classification {
    ParityTag parity = ParityTag::none;
    NodalTag nodal = NodalTag::non_nodal;
    int zero_count = 0;
    double zero_position = 0.0;
    double even_defect = 0.0;
    double odd_defect = 0.0;
};

// Parity by the reflection test (meaningful only for the symmetric boundary
// phases gamma in {0, +-pi/2}) and nodal structure from the density sampled
// on the grid. Interior density minima are refined with a local parabola;
// a refined minimum below 1e-8 of the density maximum counts as a zero.
// In strict mode more than one zero is an error rather than a guess.
inline Classification classify(const StateVector& st, const PositionGrid& grid,
                               const SystemConfig& cfg, bool strict = true) {
    if (st.representation != Representation::position_sampled)
        throw std::invalid_argument("classify: state must be position-sampled");
    int M = grid.size();
    if (static_cast<int>(st.amplitudes.size()) != M)
        throw std::invalid_argument("classify: sample count does not match grid");

    Classification out;

    double norm2 = 0.0, even2 = 0.0, odd2 = 0.0;
    for (int i = 0; i < M; ++i) {
        auto a = st.amplitudes[i];
        auto b = st.amplitudes[M - 1 - i];
        norm2 += grid.weights[i] * std::norm(a);
        even2 += grid.weights[i] * std::norm(a - b);
        odd2 += grid.weights[i] * std::norm(a + b);
    }
    double norm = std::sqrt(norm2);
    if (!(norm > 0)) throw std::invalid_argument("classify: state has zero norm");
    out.even_defect = std::sqrt(even2) / norm;
    out.odd_defect = std::sqrt(odd2) / norm;
    bool symmetric_phase = cfg.is_periodic() || cfg.is_pi_half();
    out.parity = symmetric_phase
                     ? (out.even_defect <= out.odd_defect ? ParityTag::even : ParityTag::odd)
                     : ParityTag::none;

    std::vector<double> density(M);
    double dmax = 0.0;
    for (int i = 0; i < M; ++i) {
        density[i] = std::norm(st.amplitudes[i]);
        dmax = std::max(dmax, density[i]);
    }
    double threshold = 1e-8 * dmax;

    for (int i = 1; i + 1 < M; ++i) {
        if (!(density[i] < density[i - 1] && density[i] <= density[i + 1])) continue;
        double q0 = grid.nodes[i - 1], q1 = grid.nodes[i], q2 = grid.nodes[i + 1];
        double d0 = density[i - 1], d1 = density[i], d2 = density[i + 1];
        double c1 = (d1 - d0) / (q1 - q0);
        double c2 = ((d2 - d1) / (q2 - q1) - c1) / (q2 - q0);
        double qv = q1, dv = d1;
        if (c2 > 0) {
            qv = 0.5 * (q0 + q1) - c1 / (2.0 * c2);
            dv = d0 + c1 * (qv - q0) + c2 * (qv - q0) * (qv - q1);
            dv = std::max(dv, 0.0);
        }
        if (dv <= threshold) {
            if (out.zero_count == 0) out.zero_position = qv;
            ++out.zero_count;
        }
    }

    if (out.zero_count > 1 && strict)
        throw std::runtime_error("classify: ambiguous nodal structure, " +
                                 std::to_string(out.zero_count) +
                                 " near-zero density minima");
    out.nodal = out.zero_count >= 1 ? NodalTag::nodal : NodalTag::non_nodal;
    return out;
}

}  // namespace ctoa
