#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctoa/basis.hpp"
#include "ctoa/config.hpp"
#include "ctoa/dynamics.hpp"
#include "ctoa/grid.hpp"
#include "ctoa/kernels.hpp"
#include "ctoa/operator_matrix.hpp"
#include "ctoa/spectrum.hpp"
#include "ctoa/state.hpp"

namespace ctoa {

// ---------------------------------------------------------------------------
// Commutator battery
// ---------------------------------------------------------------------------

// Defect of the time-energy exchange relation on a test state: the norm of
// ([H, T] - i hbar) psi over the full ladder |n| <= N, with psi normalized.
// The profile maps mode index to a real coefficient; modes outside the
// ladder are truncated away, and the periodic case forces the n = 0 entry
// to zero.
inline double commutator_residual(const SystemConfig& cfg, int N,
                                  const std::map<int, double>& profile) {
    if (N < 8) throw std::invalid_argument("commutator_residual: N must be >= 8");
    SystemConfig c = cfg;
    c.basis_cutoff_N = N;
    HermitianOperatorMatrix op = matrix_spectral(c);
    int dim = op.dimension();

    Eigen::VectorXd E(dim);
    for (int a = 0; a < dim; ++a) {
        int n = a - N;
        double p = c.hbar * (c.gamma + n * pi) / c.length_l;
        E(a) = p * p / (2.0 * c.mass_mu);
    }

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    for (const auto& [n, value] : profile) {
        if (n < -N || n > N) continue;
        if (c.is_periodic() && n == 0) continue;
        psi(n + N) = value;
    }
    double nrm = psi.norm();
    if (!(nrm > 0)) throw std::invalid_argument("commutator_residual: empty test state");
    psi /= nrm;

    // [E, T] has entries (E_a - E_b) T_ab, no matrix product needed.
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (int a = 0; a < dim; ++a) {
        std::complex<double> acc = 0.0;
        for (int b = 0; b < dim; ++b)
            acc += (E(a) - E(b)) * op.entries(a, b) * psi(b);
        out(a) = acc - std::complex<double>(0.0, c.hbar) * psi(a);
    }
    return out.norm();
}

// Slowly decaying exponential ladder profile with three moment corrections.
// The exchange defect of a raw profile is dominated by three alternating
// boundary sums; zeroing them with corrections at the three lowest-momentum
// modes turns a residual that grows with N into one that falls to the
// floating-point floor.
inline std::map<int, double> default_commutator_family(const SystemConfig& cfg,
                                                       int support = 3000,
                                                       double width = 8.0) {
    std::map<int, double> profile;
    std::vector<int> modes;
    for (int n = -support; n <= support; ++n) {
        if (cfg.is_periodic() && n == 0) continue;
        profile[n] = std::exp(-std::fabs(static_cast<double>(n)) / width);
        modes.push_back(n);
    }

    double S_inv = 0, S_lin = 0, S_flat = 0;
    for (int n : modes) {
        double x = cfg.gamma + n * pi;
        double alt = (n % 2 == 0) ? 1.0 : -1.0;
        double cn = profile[n];
        S_inv += alt * cn / x;
        S_lin += alt * cn * x;
        S_flat += alt * cn;
    }

    // Three smallest |x_n|, ties by smaller |n|, then the positive index.
    std::vector<int> order = modes;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double xa = std::fabs(cfg.gamma + a * pi), xb = std::fabs(cfg.gamma + b * pi);
        if (xa != xb) return xa < xb;
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return a > b;
    });
    int m[3] = {order[0], order[1], order[2]};

    Eigen::Matrix3d A;
    Eigen::Vector3d rhs(-S_inv, -S_lin, -S_flat);
    for (int i = 0; i < 3; ++i) {
        double x = cfg.gamma + m[i] * pi;
        double alt = (m[i] % 2 == 0) ? 1.0 : -1.0;
        A(0, i) = alt / x;
        A(1, i) = alt * x;
        A(2, i) = alt;
    }
    Eigen::Vector3d delta = A.partialPivLu().solve(rhs);
    for (int i = 0; i < 3; ++i) profile[m[i]] += delta(i);
    return profile;
}

// Uncorrected Gaussian ladder profile; kept as the documented counterexample
// whose exchange defect grows with the cutoff.
inline std::map<int, double> gaussian_profile(const SystemConfig& cfg,
                                              int support = 3000,
                                              double width = 8.0) {
    std::map<int, double> profile;
    for (int n = -support; n <= support; ++n) {
        if (cfg.is_periodic() && n == 0) continue;
        double z = n / width;
        profile[n] = std::exp(-z * z);
    }
    return profile;
}

// ---------------------------------------------------------------------------
// Cross-route validation and convergence
// ---------------------------------------------------------------------------

struct CrossCheck {
    double analytic_vs_spectral = 0.0;
    double analytic_vs_nystrom = 0.0;
    double spectral_vs_nystrom = 0.0;

    double worst() const {
        return std::max({analytic_vs_spectral, analytic_vs_nystrom, spectral_vs_nystrom});
    }
};

// Relative disagreement of the first K positive eigenvalues between the
// analytic route and the two discretizations, all divided by the analytic
// value.
inline CrossCheck cross_validate(const SystemConfig& cfg, int K) {
    std::vector<SpectralLine> lines = spectrum(cfg, K);
    PositionGrid grid = build_grid(cfg.grid_points_M, cfg.length_l);

    auto pairs_s = diagonalize(matrix_spectral(cfg), cfg, grid, K);
    auto pairs_n = diagonalize(matrix_nystrom(cfg, grid, kernel_kind_for(cfg)), cfg, grid, K);
    std::vector<double> tau_s = plus_branch_eigenvalues(pairs_s, K);
    std::vector<double> tau_n = plus_branch_eigenvalues(pairs_n, K);

    CrossCheck out;
    for (int k = 0; k < K; ++k) {
        double ta = lines[k].tau_plus;
        out.analytic_vs_spectral =
            std::max(out.analytic_vs_spectral, std::fabs(tau_s[k] - ta) / ta);
        out.analytic_vs_nystrom =
            std::max(out.analytic_vs_nystrom, std::fabs(tau_n[k] - ta) / ta);
        out.spectral_vs_nystrom =
            std::max(out.spectral_vs_nystrom, std::fabs(tau_s[k] - tau_n[k]) / ta);
    }
    return out;
}

struct ConvergenceStudy {
    std::vector<int> cutoffs;
    std::vector<std::vector<double>> errors;  // per cutoff, per rank, relative
    bool monotone = false;
    double richardson_error = 0.0;
    double parity_delta = 0.0;
    double parity_reference_error = 0.0;
};

// Truncation-error study of the spectral route against the analytic
// eigenvalues: per-rank errors over a ladder of cutoffs, a Richardson
// extrapolation from the last doubling, and the cutoff-parity probe
// comparing N against N + 1 at the smallest cutoff.
inline ConvergenceStudy convergence_study(const SystemConfig& cfg,
                                          std::vector<int> cutoffs, int ranks = 4) {
    if (cutoffs.size() < 2)
        throw std::invalid_argument("convergence_study: need at least two cutoffs");
    std::vector<SpectralLine> lines = spectrum(cfg, ranks);

    ConvergenceStudy study;
    study.cutoffs = cutoffs;
    std::vector<double> tau1;
    for (int N : cutoffs) {
        SystemConfig c = cfg;
        c.basis_cutoff_N = N;
        PositionGrid grid = build_grid(std::max(64, std::min(cfg.grid_points_M, 256)),
                                       cfg.length_l);
        auto pairs = diagonalize(matrix_spectral(c), c, grid, ranks);
        std::vector<double> tau = plus_branch_eigenvalues(pairs, ranks);
        tau1.push_back(tau[0]);
        std::vector<double> errs(ranks);
        for (int k = 0; k < ranks; ++k)
            errs[k] = std::fabs(tau[k] - lines[k].tau_plus) / lines[k].tau_plus;
        study.errors.push_back(std::move(errs));
    }

    study.monotone = true;
    for (std::size_t i = 1; i < study.errors.size(); ++i)
        for (int k = 0; k < ranks; ++k)
            if (study.errors[i][k] > study.errors[i - 1][k]) study.monotone = false;

    int Na = cutoffs[cutoffs.size() - 2], Nb = cutoffs.back();
    double extrapolated =
        (Nb * tau1.back() - Na * tau1[tau1.size() - 2]) / static_cast<double>(Nb - Na);
    study.richardson_error = std::fabs(extrapolated - lines[0].tau_plus) / lines[0].tau_plus;

    SystemConfig c_half = cfg;
    c_half.basis_cutoff_N = cutoffs.front() + 1;
    PositionGrid probe_grid = build_grid(64, cfg.length_l);
    auto pairs_half = diagonalize(matrix_spectral(c_half), c_half, probe_grid, 1);
    double tau_probe = plus_branch_eigenvalues(pairs_half, 1)[0];
    study.parity_delta = std::fabs(tau_probe - tau1.front());
    study.parity_reference_error = std::fabs(tau1.front() - lines[0].tau_plus);
    return study;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

enum class CheckStatus { pass, fail, report_only };

struct SuiteEntry {
    std::string suite;
    std::string name;
    CheckStatus status = CheckStatus::report_only;
    double metric = 0.0;
    double tolerance = 0.0;
    std::string provenance;
};

struct VerificationReport {
    SystemConfig config;
    std::vector<SuiteEntry> entries;

    bool all_passed() const {
        for (const auto& e : entries)
            if (e.status == CheckStatus::fail) return false;
        return true;
    }
};

inline std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::report_only: return "report_only";
    }
    throw std::invalid_argument("unknown status");
}

inline CheckStatus status_from_string(const std::string& s) {
    if (s == "pass") return CheckStatus::pass;
    if (s == "fail") return CheckStatus::fail;
    if (s == "report_only") return CheckStatus::report_only;
    throw std::invalid_argument("unknown status: " + s);
}

inline nlohmann::ordered_json to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["config"] = {{"length_l", report.config.length_l},
                   {"mass_mu", report.config.mass_mu},
                   {"hbar", report.config.hbar},
                   {"gamma", report.config.gamma},
                   {"basis_cutoff", report.config.basis_cutoff_N},
                   {"grid_points", report.config.grid_points_M},
                   {"root_tolerance", report.config.root_tolerance},
                   {"natural_units", report.config.natural_units}};
    j["all_passed"] = report.all_passed();
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"suite", e.suite},
                           {"name", e.name},
                           {"status", to_string(e.status)},
                           {"metric", e.metric},
                           {"tolerance", e.tolerance},
                           {"provenance", e.provenance}});
    }
    j["entries"] = entries;
    return j;
}

inline VerificationReport report_from_json(const nlohmann::json& j) {
    VerificationReport report;
    const auto& c = j.at("config");
    report.config.length_l = c.at("length_l").get<double>();
    report.config.mass_mu = c.at("mass_mu").get<double>();
    report.config.hbar = c.at("hbar").get<double>();
    report.config.gamma = c.at("gamma").get<double>();
    report.config.basis_cutoff_N = c.at("basis_cutoff").get<int>();
    report.config.grid_points_M = c.at("grid_points").get<int>();
    report.config.root_tolerance = c.at("root_tolerance").get<double>();
    report.config.natural_units = c.at("natural_units").get<bool>();
    for (const auto& e : j.at("entries")) {
        SuiteEntry entry;
        entry.suite = e.at("suite").get<std::string>();
        entry.name = e.at("name").get<std::string>();
        entry.status = status_from_string(e.at("status").get<std::string>());
        entry.metric = e.at("metric").get<double>();
        entry.tolerance = e.at("tolerance").get<double>();
        entry.provenance = e.at("provenance").get<std::string>();
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace detail {

class ReportBuilder {
  public:
    explicit ReportBuilder(const SystemConfig& cfg) { report_.config = cfg; }

    // A check passes when metric <= tolerance. Exceptions become honest
    // failures with the message preserved in the provenance field.
    void check(const std::string& suite, const std::string& name,
               const std::string& provenance, double tolerance,
               const std::function<double()>& compute) {
        SuiteEntry e;
        e.suite = suite;
        e.name = name;
        e.tolerance = tolerance;
        e.provenance = provenance;
        try {
            e.metric = compute();
            e.status = e.metric <= tolerance ? CheckStatus::pass : CheckStatus::fail;
        } catch (const std::exception& ex) {
            e.metric = 1e300;
            e.status = CheckStatus::fail;
            e.provenance = provenance + "; error: " + ex.what();
        }
        report_.entries.push_back(std::move(e));
    }

    void note(const std::string& suite, const std::string& name,
              const std::string& provenance,
              const std::function<double()>& compute) {
        SuiteEntry e;
        e.suite = suite;
        e.name = name;
        e.tolerance = 0.0;
        e.provenance = provenance;
        e.status = CheckStatus::report_only;
        try {
            e.metric = compute();
        } catch (const std::exception& ex) {
            e.metric = 1e300;
            e.provenance = provenance + "; error: " + ex.what();
        }
        report_.entries.push_back(std::move(e));
    }

    VerificationReport finish() {
        std::stable_sort(report_.entries.begin(), report_.entries.end(),
                         [](const SuiteEntry& a, const SuiteEntry& b) {
                             return a.suite < b.suite;
                         });
        return report_;
    }

  private:
    VerificationReport report_;
};

}  // namespace detail

namespace detail {

// Shared per-phase computations for the spectral suite.
struct PhaseBundle {
    SystemConfig c;
    std::vector<SpectralLine> lines;
    PositionGrid grid;
    std::vector<EigenPair> pairs_spectral;
    std::vector<EigenPair> pairs_nystrom;
    std::vector<double> tau_spectral;
    std::vector<double> tau_nystrom;
};

inline PhaseBundle make_phase_bundle(SystemConfig c, int K, int grid_M) {
    PhaseBundle b;
    b.c = c;
    b.lines = spectrum(c, K);
    b.grid = build_grid(grid_M, c.length_l);
    b.pairs_spectral = diagonalize(matrix_spectral(c), c, b.grid, K);
    b.pairs_nystrom =
        diagonalize(matrix_nystrom(c, b.grid, kernel_kind_for(c)), c, b.grid, K);
    b.tau_spectral = plus_branch_eigenvalues(b.pairs_spectral, K);
    b.tau_nystrom = plus_branch_eigenvalues(b.pairs_nystrom, K);
    return b;
}

inline double cross_check_worst(const PhaseBundle& b, int K) {
    double worst = 0.0;
    for (int k = 0; k < K; ++k) {
        double ta = b.lines[k].tau_plus;
        worst = std::max(worst, std::fabs(b.tau_spectral[k] - ta) / ta);
        worst = std::max(worst, std::fabs(b.tau_nystrom[k] - ta) / ta);
        worst = std::max(worst, std::fabs(b.tau_spectral[k] - b.tau_nystrom[k]) / ta);
    }
    return worst;
}

}  // namespace detail

// Every invariant suite at the configured sizes, merged into one report
// sorted by suite name. Expensive matrix factorizations are shared between
// the entries that need them. Reference-tagged entries compare against
// tabulated four-decimal arrival times at the standard phase gamma = 0.01;
// outside natural units those comparisons are meaningless and are replaced
// by a single report-only marker. Every entry is computed defensively, so a
// deliberately degraded configuration yields honest failures instead of a
// crash.
inline VerificationReport run_all(const SystemConfig& cfg) {
    detail::ReportBuilder rb(cfg);
    const int K = 8;
    double l = cfg.length_l;

    SystemConfig generic_cfg = cfg;
    if (spectral_case_for(cfg.gamma) != SpectralCase::generic) generic_cfg.gamma = 0.01;
    SystemConfig pi_half_cfg = cfg;
    pi_half_cfg.gamma = pi / 2;
    SystemConfig periodic_cfg = cfg;
    periodic_cfg.gamma = 0.0;

    // ---- core ----
    rb.check("core", "grid_weight_sum", "identity", 1e-12, [&] {
        double worst = 0.0;
        for (int M : {16, 64, 256, cfg.grid_points_M}) {
            PositionGrid g = build_grid(M, l);
            double sum = 0.0;
            for (double w : g.weights) sum += w;
            worst = std::max(worst, std::fabs(sum - 2.0 * l) / (2.0 * l));
        }
        return worst;
    });
    rb.check("core", "basis_boundary_condition", "identity", 1e-12, [&] {
        SystemConfig c = cfg;
        c.gamma = 0.7;
        double worst = 0.0;
        std::complex<double> twist(std::cos(2.0 * c.gamma), -std::sin(2.0 * c.gamma));
        for (int n : {-3, 0, 5}) {
            auto left = basis_function(n, -l, c);
            auto right = basis_function(n, l, c);
            worst = std::max(worst, std::abs(left - twist * right) * std::sqrt(2.0 * l));
        }
        return worst;
    });
    rb.check("core", "basis_orthonormality", "derived", 1e-9, [&] {
        SystemConfig c = cfg;
        c.gamma = 0.7;
        PositionGrid g = build_grid(cfg.grid_points_M, l);
        double worst = 0.0;
        for (int mm = -16; mm <= 16; ++mm) {
            for (int n = -16; n <= 16; ++n) {
                std::complex<double> acc = 0.0;
                for (int i = 0; i < g.size(); ++i)
                    acc += g.weights[i] * std::conj(basis_function(mm, g.nodes[i], c)) *
                           basis_function(n, g.nodes[i], c);
                double target = mm == n ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(acc - target));
            }
        }
        return worst;
    });
    rb.check("core", "state_round_trip", "derived", 1e-8, [&] {
        SpectralLine line = spectral_line(generic_cfg, 2);
        PositionGrid g = build_grid(cfg.grid_points_M, l);
        StateVector pos = sample_eigenfunction(generic_cfg, line, Branch::plus, g);
        StateVector mom = to_momentum(pos, g, make_index_set(generic_cfg), generic_cfg);
        StateVector back = to_position(mom, g, make_index_set(generic_cfg), generic_cfg);
        double worst = 0.0;
        for (int i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(back.amplitudes[i] - pos.amplitudes[i]));
        return worst;
    });

    // ---- commutator ----
    std::vector<int> comm_sizes = {64, 128, 256, std::min(512, cfg.basis_cutoff_N)};
    std::sort(comm_sizes.begin(), comm_sizes.end());
    comm_sizes.erase(std::unique(comm_sizes.begin(), comm_sizes.end()), comm_sizes.end());
    struct PhaseTag {
        const char* name;
        const SystemConfig* c;
    };
    PhaseTag comm_phases[3] = {{"pi_half", &pi_half_cfg},
                               {"gamma_generic", &generic_cfg},
                               {"periodic", &periodic_cfg}};
    for (const auto& ph : comm_phases) {
        std::vector<double> residuals(comm_sizes.size(), 0.0);
        bool have = false;
        try {
            auto family = default_commutator_family(*ph.c);
            for (std::size_t i = 0; i < comm_sizes.size(); ++i)
                residuals[i] = commutator_residual(*ph.c, comm_sizes[i], family);
            have = true;
        } catch (const std::exception&) {
        }
        for (std::size_t i = 0; i < comm_sizes.size(); ++i) {
            std::string nm = std::string("residual_default_") + ph.name + "_N" +
                             std::to_string(comm_sizes[i]);
            rb.note("commutator", nm, "derived", [&, i, have]() -> double {
                if (!have) throw std::runtime_error("residual unavailable");
                return residuals[i];
            });
        }
        rb.check("commutator", std::string("residual_shrinks_") + ph.name, "derived",
                 0.0, [&, have]() -> double {
                     if (!have) throw std::runtime_error("residual unavailable");
                     return residuals.back() - residuals.front();
                 });
    }
    rb.check("commutator", "residual_hbar_linearity", "derived", 1e-10, [&] {
        SystemConfig c1 = pi_half_cfg;
        SystemConfig c2 = pi_half_cfg;
        c2.hbar = 2.0 * c2.hbar;
        c2.natural_units = false;
        auto fam1 = default_commutator_family(c1);
        auto fam2 = default_commutator_family(c2);
        double r1 = commutator_residual(c1, 128, fam1);
        double r2 = commutator_residual(c2, 128, fam2);
        return std::fabs(r2 / r1 - 2.0);
    });
    rb.note("commutator", "residual_single_mode_n3", "derived", [&] {
        return commutator_residual(pi_half_cfg, 64, {{3, 1.0}});
    });
    rb.note("commutator", "residual_raw_gaussian_N64", "derived", [&] {
        return commutator_residual(pi_half_cfg, 64, gaussian_profile(pi_half_cfg));
    });
    rb.note("commutator", "residual_raw_gaussian_N512", "derived", [&] {
        return commutator_residual(pi_half_cfg, std::min(512, cfg.basis_cutoff_N),
                                   gaussian_profile(pi_half_cfg));
    });

    // ---- spectral ----
    int grid_M = std::max(16, std::min(cfg.grid_points_M, cfg.basis_cutoff_N));
    std::map<std::string, detail::PhaseBundle> bundles;
    std::map<std::string, std::string> bundle_errors;
    auto bundle_of = [&](const std::string& key,
                         const SystemConfig& c) -> detail::PhaseBundle& {
        auto it = bundles.find(key);
        if (it != bundles.end()) return it->second;
        auto err = bundle_errors.find(key);
        if (err != bundle_errors.end()) throw std::runtime_error(err->second);
        try {
            auto res = bundles.emplace(key, detail::make_phase_bundle(c, K, grid_M));
            return res.first->second;
        } catch (const std::exception& ex) {
            bundle_errors[key] = std::string("bundle failed: ") + ex.what();
            throw std::runtime_error(bundle_errors[key]);
        }
    };

    rb.check("spectral", "cross_validate_gamma_generic", "derived", 1e-3, [&] {
        return detail::cross_check_worst(bundle_of("generic", generic_cfg), K);
    });
    rb.check("spectral", "cross_validate_pi_half", "derived", 1e-3, [&] {
        return detail::cross_check_worst(bundle_of("pi_half", pi_half_cfg), K);
    });
    rb.check("spectral", "cross_validate_periodic", "derived", 1e-3, [&] {
        return detail::cross_check_worst(bundle_of("periodic", periodic_cfg), K);
    });
    rb.check("spectral", "pairing_defect_pi_half", "identity", 1e-10, [&] {
        auto& b = bundle_of("pi_half", pi_half_cfg);
        double worst = 0.0;
        for (int k = 1; k <= K; ++k) {
            double tp = 0, tm = 0;
            for (const auto& p : b.pairs_spectral)
                if (p.quantum_number == k)
                    (p.branch == Branch::plus ? tp : tm) = p.eigenvalue;
            worst = std::max(worst, std::fabs(tp + tm));
        }
        return worst;
    });
    rb.check("spectral", "parity_defect_pi_half", "derived", 1e-8, [&] {
        auto& b = bundle_of("pi_half", pi_half_cfg);
        double worst = 0.0;
        int seen = 0;
        for (const auto& p : b.pairs_nystrom) {
            if (p.branch != Branch::plus || p.quantum_number > 6) continue;
            Classification cls = classify(p.eigenfunction, b.grid, b.c, false);
            worst = std::max(worst, std::min(cls.even_defect, cls.odd_defect));
            ++seen;
        }
        if (seen < 6) throw std::runtime_error("fewer than 6 pairs");
        return worst;
    });
    rb.check("spectral", "eigenvector_overlap_pi_half", "derived", 1e-3, [&] {
        auto& b = bundle_of("pi_half", pi_half_cfg);
        double worst = 0.0;
        for (const auto& p : b.pairs_nystrom) {
            if (p.branch != Branch::plus || p.quantum_number > 6) continue;
            StateVector mine =
                sample_eigenfunction(b.c, b.lines[p.quantum_number - 1], Branch::plus, b.grid);
            std::complex<double> acc = 0.0;
            for (int i = 0; i < b.grid.size(); ++i)
                acc += b.grid.weights[i] * std::conj(mine.amplitudes[i]) *
                       p.eigenfunction.amplitudes[i];
            worst = std::max(worst, 1.0 - std::abs(acc));
        }
        return worst;
    });
    rb.check("spectral", "odd_families_coincide", "identity", 1e-10, [&] {
        PositionGrid g = build_grid(128, l);
        auto odd_line = [&](const SystemConfig& c, int family_rank) {
            auto lines = spectrum(c, 2 * family_rank + 2);
            for (const auto& line : lines)
                if (line.parity == ParityTag::odd && line.family_index == family_rank)
                    return line;
            throw std::runtime_error("odd line not found");
        };
        double worst = 0.0;
        for (int rank = 1; rank <= 3; ++rank) {
            StateVector a =
                sample_eigenfunction(periodic_cfg, odd_line(periodic_cfg, rank),
                                     Branch::plus, g);
            StateVector b =
                sample_eigenfunction(pi_half_cfg, odd_line(pi_half_cfg, rank),
                                     Branch::plus, g);
            for (int i = 0; i < g.size(); ++i)
                worst = std::max(worst, std::abs(a.amplitudes[i] - b.amplitudes[i]));
        }
        return worst;
    });
    rb.check("spectral", "kernel_residual_n2_generic", "derived", 1e-3, [&] {
        PositionGrid g = build_grid(cfg.grid_points_M, l);
        SpectralLine line = spectral_line(generic_cfg, 2);
        HermitianOperatorMatrix A =
            matrix_nystrom(generic_cfg, g, kernel_kind_for(generic_cfg));
        StateVector st = sample_eigenfunction(generic_cfg, line, Branch::plus, g);
        Eigen::VectorXcd v(g.size());
        for (int i = 0; i < g.size(); ++i)
            v(i) = std::sqrt(g.weights[i]) * st.amplitudes[i];
        Eigen::VectorXcd defect = A.entries * v - line.tau_plus * v;
        return defect.norm() / (line.tau_plus * v.norm());
    });
    rb.check("spectral", "hs_frobenius_identity", "derived", 1e-4, [&] {
        PositionGrid g = build_grid(std::min(cfg.grid_points_M, 256), l);
        HermitianOperatorMatrix A =
            matrix_nystrom(pi_half_cfg, g, kernel_kind_for(pi_half_cfg));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
            A.entries, Eigen::EigenvaluesOnly);
        double lam2 = solver.eigenvalues().squaredNorm();
        double frob = A.entries.squaredNorm();
        return std::fabs(lam2 / frob - 1.0);
    });
    rb.check("spectral", "hs_quadrature_stability", "derived", 1e-6, [&] {
        double worst = 0.0;
        for (const SystemConfig* c : {&pi_half_cfg, &generic_cfg}) {
            PositionGrid g1 = build_grid(512, l);
            PositionGrid g2 = build_grid(1024, l);
            double h1 = hilbert_schmidt_norm(kernel_kind_for(*c), *c, g1);
            double h2 = hilbert_schmidt_norm(kernel_kind_for(*c), *c, g2);
            worst = std::max(worst, std::fabs(h1 / h2 - 1.0));
        }
        return worst;
    });
    rb.check("spectral", "hs_parameter_scaling", "identity", 1e-12, [&] {
        PositionGrid g = build_grid(256, l);
        double base = hilbert_schmidt_norm(kernel_kind_for(pi_half_cfg), pi_half_cfg, g);
        SystemConfig c = pi_half_cfg;
        c.mass_mu *= 2.0;
        c.hbar *= 4.0;
        c.natural_units = false;
        double scaled = hilbert_schmidt_norm(kernel_kind_for(c), c, g);
        double factor = (c.mass_mu / pi_half_cfg.mass_mu) * (pi_half_cfg.hbar / c.hbar);
        return std::fabs(scaled / (base * factor * factor) - 1.0);
    });
    rb.check("spectral", "convergence_monotone", "derived", 0.5, [&] {
        int N = cfg.basis_cutoff_N;
        std::vector<int> ladder = {std::max(8, N / 8), std::max(8, N / 4),
                                   std::max(8, N / 2), N};
        ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
        ConvergenceStudy study = convergence_study(pi_half_cfg, ladder);
        return study.monotone ? 0.0 : 1.0;
    });
    rb.check("spectral", "convergence_richardson", "derived", 1e-4, [&] {
        int N = cfg.basis_cutoff_N;
        ConvergenceStudy study =
            convergence_study(pi_half_cfg, {std::max(8, N / 2), N});
        return study.richardson_error;
    });
    rb.check("spectral", "convergence_cutoff_parity", "derived", 0.0, [&] {
        ConvergenceStudy study = convergence_study(pi_half_cfg, {64, 128});
        return study.parity_delta - study.parity_reference_error;
    });
    rb.note("spectral", "periodic_even_constant_residual_printed", "reference", [&] {
        PositionGrid g = build_grid(cfg.grid_points_M, l);
        SpectralLine line;
        for (const auto& cand : spectrum(periodic_cfg, 4))
            if (cand.parity == ParityTag::even && cand.family_index == 1) line = cand;
        HermitianOperatorMatrix A =
            matrix_nystrom(periodic_cfg, g, KernelKind::periodic);
        StateVector st = sample_eigenfunction(periodic_cfg, line, Branch::plus, g);
        Eigen::VectorXcd v(g.size());
        for (int i = 0; i < g.size(); ++i)
            v(i) = std::sqrt(g.weights[i]) * st.amplitudes[i];
        return (A.entries * v - line.tau_plus * v).norm() / (line.tau_plus * v.norm());
    });

    if (cfg.natural_units) {
        auto tau_of = [&](int n) {
            return bundle_of("generic", generic_cfg).lines[n - 1].tau_plus;
        };
        rb.check("spectral", "tau_reference_n2", "reference", 5e-4,
                 [&] { return std::fabs(tau_of(2) - 0.0899); });
        rb.check("spectral", "tau_reference_n6", "reference", 5e-4,
                 [&] { return std::fabs(spectral_line(generic_cfg, 6).tau_plus - 0.0276); });
        rb.check("spectral", "tau_reference_n20", "reference", 5e-4,
                 [&] { return std::fabs(spectral_line(generic_cfg, 20).tau_plus - 0.0081); });
        rb.check("spectral", "tau_reference_n21", "reference", 5e-4,
                 [&] { return std::fabs(spectral_line(generic_cfg, 21).tau_plus - 0.0079); });
    } else {
        rb.note("spectral", "reference_checks_require_natural_units", "reference",
                [] { return 1.0; });
    }

    // ---- dynamics ----
    if (cfg.natural_units) {
        auto lines21 = spectrum(generic_cfg, 21);
        StateVector st2, st6, st20, st21;
        std::string projection_error;
        try {
            st2 = project_eigenfunction(generic_cfg, lines21[1], Branch::plus);
            st6 = project_eigenfunction(generic_cfg, lines21[5], Branch::plus);
            st20 = project_eigenfunction(generic_cfg, lines21[19], Branch::plus);
            st21 = project_eigenfunction(generic_cfg, lines21[20], Branch::plus);
        } catch (const std::exception& ex) {
            projection_error = ex.what();
        }
        auto need = [&](const StateVector& st) -> const StateVector& {
            if (!projection_error.empty()) throw std::runtime_error(projection_error);
            return st;
        };

        rb.check("dynamics", "unitarity_drift", "identity", 1e-10, [&] {
            EvolutionTrace tr =
                trace_evolution(need(st20), 2.0 * lines21[19].tau_plus, 128, generic_cfg);
            double worst = 0.0;
            for (double n : tr.norms) worst = std::max(worst, std::fabs(n - 1.0));
            return worst;
        });
        rb.check("dynamics", "evolve_group_property", "identity", 1e-12, [&] {
            double t1 = 0.0137, t2 = 0.0291;
            StateVector a = evolve(evolve(need(st2), t1, generic_cfg), t2, generic_cfg);
            StateVector b = evolve(need(st2), t1 + t2, generic_cfg);
            double acc = 0.0;
            for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
                acc += std::norm(a.amplitudes[i] - b.amplitudes[i]);
            return std::sqrt(acc);
        });
        rb.check("dynamics", "collapse_time_n20", "reference", 0.05, [&] {
            double t = collapse_time(need(st20), 2.0 * lines21[19].tau_plus, generic_cfg);
            return std::fabs(t / 0.0081 - 1.0);
        });
        rb.check("dynamics", "density_peak_time_n20", "reference", 0.05, [&] {
            EvolutionTrace tr =
                trace_evolution(need(st20), 2.0 * lines21[19].tau_plus, 320, generic_cfg);
            int jmax = 0;
            for (std::size_t j = 0; j < tr.times.size(); ++j)
                if (tr.density_at_origin[j] > tr.density_at_origin[jmax])
                    jmax = static_cast<int>(j);
            return std::fabs(tr.times[jmax] / lines21[19].tau_plus - 1.0);
        });
        rb.check("dynamics", "crossing_n2", "reference", 0.05, [&] {
            EvolutionTrace tr = trace_evolution(need(st2), 0.18, 320, generic_cfg);
            return std::fabs(zero_crossing_time(tr) / 0.0899 - 1.0);
        });
        rb.check("dynamics", "crossing_n6", "reference", 0.05, [&] {
            EvolutionTrace tr = trace_evolution(need(st6), 0.055, 320, generic_cfg);
            return std::fabs(zero_crossing_time(tr) / 0.0276 - 1.0);
        });
        rb.check("dynamics", "crossing_n20", "reference", 0.05, [&] {
            EvolutionTrace tr = trace_evolution(need(st20), 0.017, 320, generic_cfg);
            return std::fabs(zero_crossing_time(tr) / 0.0081 - 1.0);
        });
        rb.check("dynamics", "deviation_n2", "reference", 0.05, [&] {
            double tau = collapse_time(need(st2), 2.0 * lines21[1].tau_plus, generic_cfg);
            EvolutionTrace tr = trace_evolution(need(st2), tau, 256, generic_cfg);
            return trajectory_deviation(tr, generic_cfg);
        });
        rb.check("dynamics", "arrival_signatures_n20", "derived", 0.5, [&] {
            ArrivalCheck chk =
                ideal_arrival_check(need(st20), 2.0 * lines21[19].tau_plus, generic_cfg);
            return chk.all() ? 0.0 : 1.0;
        });
        rb.check("dynamics", "mass_scaling_n20", "derived", 1e-12, [&] {
            ArrivalCheck chk =
                ideal_arrival_check(need(st20), 2.0 * lines21[19].tau_plus, generic_cfg);
            return chk.mass_scaling_error;
        });
        rb.check("dynamics", "variance_exponent_window", "derived", 0.5, [&] {
            ScalingFit fit = variance_scaling_fit(generic_cfg, 10, 40);
            return std::fabs(fit.exponent - 1.5);
        });
        rb.check("dynamics", "variance_minimum_monotone", "derived", 0.0, [&] {
            ScalingFit fit = variance_scaling_fit(generic_cfg, 10, 40);
            double worst = -1e300;
            for (std::size_t i = 1; i < fit.variance_minima.size(); ++i)
                worst = std::max(worst,
                                 fit.variance_minima[i] - fit.variance_minima[i - 1]);
            return worst;
        });
        rb.note("dynamics", "arrival_spike_ratio_n21", "reference", [&] {
            EvolutionTrace tr = trace_evolution(need(st21), 2.0 * lines21[20].tau_plus,
                                                320, generic_cfg, true, 201);
            int jmax = 0;
            for (std::size_t j = 0; j < tr.times.size(); ++j)
                if (tr.density_at_origin[j] > tr.density_at_origin[jmax])
                    jmax = static_cast<int>(j);
            double field_max = 0.0;
            for (double d : tr.snapshots[jmax]) field_max = std::max(field_max, d);
            return tr.density_at_origin[jmax] / field_max;
        });
        rb.note("dynamics", "arrival_series_peak_ratio_n21", "reference", [&] {
            EvolutionTrace tr =
                trace_evolution(need(st21), 2.0 * lines21[20].tau_plus, 320, generic_cfg);
            double tau = lines21[20].tau_plus;
            double at_tau = 0.0, best = 0.0;
            for (std::size_t j = 0; j < tr.times.size(); ++j) {
                best = std::max(best, tr.density_at_origin[j]);
                if (std::fabs(tr.times[j] - tau) <=
                    std::fabs(tr.times[0] - tau) + 1e-12)
                    at_tau = std::max(at_tau, tr.density_at_origin[j]);
            }
            double closest = 1e300;
            for (std::size_t j = 0; j < tr.times.size(); ++j) {
                double d = std::fabs(tr.times[j] - tau);
                if (d < closest) {
                    closest = d;
                    at_tau = tr.density_at_origin[j];
                }
            }
            return at_tau / best;
        });
    } else {
        rb.note("dynamics", "reference_checks_require_natural_units", "reference",
                [] { return 1.0; });
    }

    return rb.finish();
}

}  // namespace ctoa
