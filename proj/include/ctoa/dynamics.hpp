#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ctoa/basis.hpp"
#include "ctoa/config.hpp"
#include "ctoa/grid.hpp"
#include "ctoa/spectrum.hpp"
#include "ctoa/state.hpp"

namespace ctoa {

struct Observables {
    double mean_q = 0.0;
    double var_q = 0.0;
    double mean_p = 0.0;
    double density_at_origin = 0.0;
    double norm = 0.0;
};

namespace detail {

// Closed-form position matrices over an index set, split into real parts:
// q is -(i l / pi) F with F real antisymmetric, q^2 is real symmetric. Both
// are independent of mass and of gamma beyond the index set itself, so one
// engine serves a whole evolution study.
class ObservableEngine {
  public:
    ObservableEngine(const MomentumIndexSet& modes, const SystemConfig& cfg)
        : modes_(modes), cfg_(cfg) {
        int dim = modes.size();
        F_.resize(dim, dim);
        Q2_.resize(dim, dim);
        p_.resize(dim);
        E_.resize(dim);
        double l = cfg.length_l, l2 = l * l;
        for (int a = 0; a < dim; ++a) {
            int na = modes.index_at(a);
            double x = cfg.gamma + na * pi;
            p_[a] = cfg.hbar * x / l;
            E_[a] = p_[a] * p_[a] / (2.0 * cfg.mass_mu);
            for (int b = 0; b < dim; ++b) {
                int nb = modes.index_at(b);
                int d = nb - na;
                if (d == 0) {
                    F_(a, b) = 0.0;
                    Q2_(a, b) = l2 / 3.0;
                } else {
                    double sign = (d % 2 == 0) ? 1.0 : -1.0;
                    F_(a, b) = sign / d;
                    Q2_(a, b) = 2.0 * l2 * sign / (pi * pi * d * d);
                }
            }
        }
    }

    int dimension() const { return static_cast<int>(p_.size()); }
    const std::vector<double>& momenta() const { return p_; }
    const std::vector<double>& energies() const { return E_; }

    Observables evaluate(const Eigen::VectorXcd& c) const {
        Eigen::VectorXd x = c.real(), y = c.imag();
        double l = cfg_.length_l;
        Observables obs;
        obs.norm = c.norm();
        obs.mean_q = (2.0 * l / pi) * x.dot(F_ * y);
        double mean_q2 = x.dot(Q2_ * x) + y.dot(Q2_ * y);
        obs.var_q = mean_q2 - obs.mean_q * obs.mean_q;
        std::complex<double> total = c.sum();
        obs.density_at_origin = std::norm(total) / (2.0 * l);
        for (int a = 0; a < dimension(); ++a) obs.mean_p += p_[a] * std::norm(c(a));
        return obs;
    }

  private:
    MomentumIndexSet modes_;
    SystemConfig cfg_;
    Eigen::MatrixXd F_;
    Eigen::MatrixXd Q2_;
    std::vector<double> p_;
    std::vector<double> E_;
};

inline Eigen::VectorXcd as_vector(const StateVector& st) {
    Eigen::VectorXcd c(st.amplitudes.size());
    for (std::size_t i = 0; i < st.amplitudes.size(); ++i) c(i) = st.amplitudes[i];
    return c;
}

inline void require_normalized(const StateVector& st) {
    if (std::fabs(st.norm - 1.0) > 1e-8)
        throw std::invalid_argument("state must be normalized to 1 within 1e-8");
}

// Phase factors exp(-i E t / hbar) applied to a coefficient vector.
inline Eigen::VectorXcd phases_applied(const Eigen::VectorXcd& c,
                                       const std::vector<double>& E, double t,
                                       double hbar) {
    Eigen::VectorXcd out(c.size());
    for (int a = 0; a < c.size(); ++a) {
        double arg = -E[a] * t / hbar;
        out(a) = c(a) * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    return out;
}

}  // namespace detail

// Free evolution of the expansion coefficients. Position-sampled input is
// projected onto the canonical index set first, which needs the grid.
inline StateVector evolve(const StateVector& st, double t, const SystemConfig& cfg,
                          const PositionGrid* grid = nullptr) {
    StateVector mom = st;
    if (st.representation == Representation::position_sampled) {
        if (!grid)
            throw std::invalid_argument("evolve: position-sampled state needs a grid");
        mom = to_momentum(st, *grid, make_index_set(cfg), cfg);
    }
    MomentumIndexSet modes = infer_index_set(mom.amplitudes.size(), cfg);
    StateVector out = mom;
    for (int a = 0; a < modes.size(); ++a) {
        int n = modes.index_at(a);
        double E = energy_eigenvalue(n, cfg);
        double arg = -E * t / cfg.hbar;
        out.amplitudes[a] *= std::complex<double>(std::cos(arg), std::sin(arg));
    }
    out.norm = state_norm(out.amplitudes, nullptr);
    return out;
}

// One-shot expectation values of a normalized momentum-space state.
inline Observables observables(const StateVector& st, const SystemConfig& cfg) {
    if (st.representation != Representation::momentum_coefficients)
        throw std::invalid_argument("observables: state must be momentum-space");
    detail::require_normalized(st);
    MomentumIndexSet modes = infer_index_set(st.amplitudes.size(), cfg);
    detail::ObservableEngine engine(modes, cfg);
    return engine.evaluate(detail::as_vector(st));
}

// Time series of the moments, steps + 1 evenly spaced samples on [0, t_max].
// Snapshots, when requested, record |psi|^2 on a uniform grid per sample.
struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> mean_q;
    std::vector<double> var_q;
    std::vector<double> mean_p;
    std::vector<double> density_at_origin;
    std::vector<double> norms;
    std::vector<double> snapshot_q;
    std::vector<std::vector<double>> snapshots;
};

inline EvolutionTrace trace_evolution(const StateVector& st, double t_max, int steps,
                                      const SystemConfig& cfg,
                                      bool with_snapshots = false,
                                      int snapshot_points = 201) {
    if (!(t_max > 0)) throw std::invalid_argument("trace_evolution: t_max must be positive");
    if (steps < 1) throw std::invalid_argument("trace_evolution: steps must be >= 1");
    if (st.representation != Representation::momentum_coefficients)
        throw std::invalid_argument("trace_evolution: state must be momentum-space");
    detail::require_normalized(st);

    MomentumIndexSet modes = infer_index_set(st.amplitudes.size(), cfg);
    detail::ObservableEngine engine(modes, cfg);
    Eigen::VectorXcd c0 = detail::as_vector(st);

    EvolutionTrace trace;
    Eigen::MatrixXcd snap;
    if (with_snapshots) {
        if (snapshot_points < 3)
            throw std::invalid_argument("trace_evolution: need at least 3 snapshot points");
        trace.snapshot_q.resize(snapshot_points);
        snap.resize(snapshot_points, modes.size());
        double l = cfg.length_l;
        for (int sidx = 0; sidx < snapshot_points; ++sidx) {
            double q = -l + 2.0 * l * sidx / (snapshot_points - 1);
            trace.snapshot_q[sidx] = q;
            for (int a = 0; a < modes.size(); ++a)
                snap(sidx, a) = basis_function(modes.index_at(a), q, cfg);
        }
    }

    for (int j = 0; j <= steps; ++j) {
        double t = t_max * j / steps;
        Eigen::VectorXcd c = detail::phases_applied(c0, engine.energies(), t, cfg.hbar);
        Observables obs = engine.evaluate(c);
        trace.times.push_back(t);
        trace.mean_q.push_back(obs.mean_q);
        trace.var_q.push_back(obs.var_q);
        trace.mean_p.push_back(obs.mean_p);
        trace.density_at_origin.push_back(obs.density_at_origin);
        trace.norms.push_back(obs.norm);
        if (with_snapshots) {
            Eigen::VectorXcd psi = snap * c;
            std::vector<double> density(psi.size());
            for (int i = 0; i < psi.size(); ++i) density[i] = std::norm(psi(i));
            trace.snapshots.push_back(std::move(density));
        }
    }
    return trace;
}

struct CollapsePoint {
    double time = 0.0;
    double variance = 0.0;
};

// Coarse scan plus golden-section refinement of the position-variance
// minimum over (0, t_max). A minimum on the window boundary, including the
// flat profile of a stationary state, is an error.
inline CollapsePoint collapse_point(const StateVector& st, double t_max,
                                    const SystemConfig& cfg, int coarse_steps = 128) {
    if (!(t_max > 0)) throw std::invalid_argument("collapse_point: t_max must be positive");
    if (coarse_steps < 64) throw std::invalid_argument("collapse_point: need >= 64 coarse steps");
    if (st.representation != Representation::momentum_coefficients)
        throw std::invalid_argument("collapse_point: state must be momentum-space");
    detail::require_normalized(st);

    MomentumIndexSet modes = infer_index_set(st.amplitudes.size(), cfg);
    detail::ObservableEngine engine(modes, cfg);
    Eigen::VectorXcd c0 = detail::as_vector(st);
    auto var_at = [&](double t) {
        Eigen::VectorXcd c = detail::phases_applied(c0, engine.energies(), t, cfg.hbar);
        return engine.evaluate(c).var_q;
    };

    int jmin = 0;
    double vmin = 0.0;
    std::vector<double> coarse(coarse_steps + 1);
    for (int j = 0; j <= coarse_steps; ++j) {
        coarse[j] = var_at(t_max * j / coarse_steps);
        if (j == 0 || coarse[j] < vmin) {
            vmin = coarse[j];
            jmin = j;
        }
    }
    if (jmin == 0 || jmin == coarse_steps)
        throw std::runtime_error("collapse_point: variance minimum lies on the window boundary");

    double a = t_max * (jmin - 1) / coarse_steps;
    double b = t_max * (jmin + 1) / coarse_steps;
    const double invphi = 0.6180339887498948482;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = var_at(c), fd = var_at(d);
    double tol = 1e-6 * t_max;
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = var_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = var_at(d);
        }
    }
    CollapsePoint out;
    out.time = 0.5 * (a + b);
    out.variance = var_at(out.time);
    return out;
}

inline double collapse_time(const StateVector& st, double t_max,
                            const SystemConfig& cfg, int coarse_steps = 128) {
    return collapse_point(st, t_max, cfg, coarse_steps).time;
}

// Trace version: discrete argmin with a parabolic refinement through the
// neighboring samples.
inline double collapse_time(const EvolutionTrace& trace) {
    int n = static_cast<int>(trace.times.size());
    if (n < 3) throw std::invalid_argument("collapse_time: trace too short");
    int jmin = 0;
    for (int j = 1; j < n; ++j)
        if (trace.var_q[j] < trace.var_q[jmin]) jmin = j;
    if (jmin == 0 || jmin == n - 1)
        throw std::runtime_error("collapse_time: variance minimum lies on the window boundary");
    double t0 = trace.times[jmin - 1], t1 = trace.times[jmin], t2 = trace.times[jmin + 1];
    double d0 = trace.var_q[jmin - 1], d1 = trace.var_q[jmin], d2 = trace.var_q[jmin + 1];
    double c1 = (d1 - d0) / (t1 - t0);
    double c2 = ((d2 - d1) / (t2 - t1) - c1) / (t2 - t0);
    if (!(c2 > 0)) return t1;
    double tv = 0.5 * (t0 + t1) - c1 / (2.0 * c2);
    return std::clamp(tv, t0, t2);
}

// First sign change of <q>(t), located by linear interpolation.
inline double zero_crossing_time(const EvolutionTrace& trace) {
    int n = static_cast<int>(trace.times.size());
    for (int j = 0; j + 1 < n; ++j) {
        double a = trace.mean_q[j], b = trace.mean_q[j + 1];
        if (a != 0.0 && b == 0.0) return trace.times[j + 1];
        if (a * b < 0.0)
            return trace.times[j] +
                   (trace.times[j + 1] - trace.times[j]) * a / (a - b);
    }
    throw std::runtime_error("zero_crossing_time: no sign change in the window");
}

// Free classical motion folded by elastic reflection at the walls; the
// configuration-space period is 4l.
inline double classical_trajectory(double q0, double p0, double t,
                                   const SystemConfig& cfg) {
    double l = cfg.length_l;
    double x = q0 + p0 * t / cfg.mass_mu;
    double period = 4.0 * l;
    double y = std::fmod(x + l, period);
    if (y < 0) y += period;
    return y <= 2.0 * l ? y - l : 3.0 * l - y;
}

// Largest distance between <q>(t) and the folded classical path launched
// from the initial moments, in units of l.
inline double trajectory_deviation(const EvolutionTrace& trace, const SystemConfig& cfg) {
    if (trace.times.empty()) throw std::invalid_argument("trajectory_deviation: empty trace");
    double q0 = trace.mean_q.front();
    double p0 = trace.mean_p.front();
    double worst = 0.0;
    for (std::size_t j = 0; j < trace.times.size(); ++j) {
        double ref = classical_trajectory(q0, p0, trace.times[j], cfg);
        worst = std::max(worst, std::fabs(trace.mean_q[j] - ref));
    }
    return worst / cfg.length_l;
}

struct PowerLawFit {
    double exponent = 0.0;
    double residual = 0.0;
};

// Least squares in log-log space for values ~ x^(-exponent); the residual is
// the RMS misfit of ln(value).
inline PowerLawFit fit_power_law(const std::vector<double>& xs,
                                 const std::vector<double>& values) {
    if (xs.size() != values.size() || xs.size() < 2)
        throw std::invalid_argument("fit_power_law: need matching lists of >= 2 points");
    int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        if (!(xs[i] > 0) || !(values[i] > 0))
            throw std::invalid_argument("fit_power_law: data must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(values[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double denom = n * sxx - sx * sx;
    if (!(std::fabs(denom) > 0))
        throw std::invalid_argument("fit_power_law: degenerate abscissas");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        double resid = ly[i] - (slope * lx[i] + intercept);
        ss += resid * resid;
    }
    PowerLawFit fit;
    fit.exponent = -slope;
    fit.residual = std::sqrt(ss / n);
    return fit;
}

// Closed-form eigenfunction projected onto the canonical momentum set,
// sampled on a dedicated fine quadrature grid and renormalized after
// truncation.
inline StateVector project_eigenfunction(const SystemConfig& cfg,
                                         const SpectralLine& line, Branch branch,
                                         int projection_points = 0) {
    int M = projection_points > 0 ? projection_points
                                  : std::max(2048, 4 * cfg.basis_cutoff_N);
    PositionGrid grid = build_grid(M, cfg.length_l);
    StateVector pos = sample_eigenfunction(cfg, line, branch, grid);
    StateVector mom = to_momentum(pos, grid, make_index_set(cfg), cfg);
    normalize(mom);
    return mom;
}

struct ScalingFit {
    std::vector<int> ns;
    std::vector<double> variance_minima;
    double exponent = 0.0;
    double residual = 0.0;
};

// Minimum variance against eigenvalue rank for even-indexed lines in
// [n_lo, n_hi], with the collapse window 2 tau_n per line.
inline ScalingFit variance_scaling_fit(const SystemConfig& cfg, int n_lo, int n_hi) {
    if (n_lo < 2 || n_hi <= n_lo)
        throw std::invalid_argument("variance_scaling_fit: bad rank range");
    std::vector<SpectralLine> lines = spectrum(cfg, n_hi);
    ScalingFit fit;
    for (int n = n_lo + (n_lo % 2); n <= n_hi; n += 2) {
        const SpectralLine& line = lines[n - 1];
        StateVector st = project_eigenfunction(cfg, line, Branch::plus);
        CollapsePoint cp = collapse_point(st, 2.0 * line.tau_plus, cfg);
        fit.ns.push_back(n);
        fit.variance_minima.push_back(cp.variance);
    }
    std::vector<double> xs(fit.ns.begin(), fit.ns.end());
    PowerLawFit pl = fit_power_law(xs, fit.variance_minima);
    fit.exponent = pl.exponent;
    fit.residual = pl.residual;
    return fit;
}

struct ArrivalCheck {
    bool localizes = false;
    bool arrives_at_origin = false;
    bool tracks_classical = false;
    bool mass_scaling_exact = false;
    double collapse_t = 0.0;
    double variance_min = 0.0;
    double mean_q_at_collapse = 0.0;
    double deviation = 0.0;
    double mass_scaling_error = 0.0;

    bool all() const {
        return localizes && arrives_at_origin && tracks_classical && mass_scaling_exact;
    }
};

// The four operational signatures of an arrival state: a unique interior
// variance minimum, arrival at the origin, classical tracking of the mean,
// and purely geometric mass scaling of the collapse time.
inline ArrivalCheck ideal_arrival_check(const StateVector& st, double t_max,
                                        const SystemConfig& cfg) {
    if (st.representation != Representation::momentum_coefficients)
        throw std::invalid_argument("ideal_arrival_check: state must be momentum-space");
    detail::require_normalized(st);
    ArrivalCheck out;

    const int coarse_steps = 256;
    MomentumIndexSet modes = infer_index_set(st.amplitudes.size(), cfg);
    detail::ObservableEngine engine(modes, cfg);
    Eigen::VectorXcd c0 = detail::as_vector(st);
    std::vector<double> coarse(coarse_steps + 1);
    int jmin = 0;
    for (int j = 0; j <= coarse_steps; ++j) {
        Eigen::VectorXcd c =
            detail::phases_applied(c0, engine.energies(), t_max * j / coarse_steps, cfg.hbar);
        coarse[j] = engine.evaluate(c).var_q;
        if (coarse[j] < coarse[jmin]) jmin = j;
    }
    if (jmin == 0 || jmin == coarse_steps) return out;

    CollapsePoint cp = collapse_point(st, t_max, cfg, coarse_steps);
    out.collapse_t = cp.time;
    out.variance_min = cp.variance;

    bool unique = true;
    double spacing = t_max / coarse_steps;
    for (int j = 1; j < coarse_steps; ++j) {
        if (!(coarse[j] < coarse[j - 1] && coarse[j] <= coarse[j + 1])) continue;
        if (std::fabs(t_max * j / coarse_steps - cp.time) <= 2.0 * spacing) continue;
        if (coarse[j] <= cp.variance * (1.0 + 1e-6)) unique = false;
    }
    out.localizes = unique;

    StateVector at_tau = evolve(st, cp.time, cfg);
    out.mean_q_at_collapse = observables(at_tau, cfg).mean_q;
    out.arrives_at_origin = std::fabs(out.mean_q_at_collapse) <= 0.02 * cfg.length_l;

    EvolutionTrace trace = trace_evolution(st, cp.time, 256, cfg);
    out.deviation = trajectory_deviation(trace, cfg);
    out.tracks_classical = out.deviation <= 0.05;

    SystemConfig doubled = cfg;
    doubled.mass_mu = 2.0 * cfg.mass_mu;
    doubled.natural_units = false;
    double scale = doubled.mass_mu / cfg.mass_mu;
    CollapsePoint cp2 = collapse_point(st, scale * t_max, doubled, coarse_steps);
    out.mass_scaling_error = std::fabs(cp2.time / (scale * cp.time) - 1.0);
    out.mass_scaling_exact = out.mass_scaling_error <= 1e-12;

    return out;
}

}  // namespace ctoa
