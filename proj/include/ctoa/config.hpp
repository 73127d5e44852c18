#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ctoa {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Physical parameters and numerical controls shared by every module.
// gamma is the boundary-condition phase of the momentum family, |gamma| < pi.
struct SystemConfig {
    double length_l = 1.0;
    double mass_mu = 1.0;
    double hbar = 1.0;
    double gamma = 0.0;
    int basis_cutoff_N = 512;
    int grid_points_M = 1024;
    double root_tolerance = 1e-12;
    bool natural_units = true;

    // The periodic case requires gamma to be exactly 0.0, which the token
    // parser produces; values merely close to zero take the generic path.
    bool is_periodic() const { return gamma == 0.0; }
    bool is_pi_half() const { return gamma == pi / 2 || gamma == -pi / 2; }
};

// Unvalidated input; absent fields fall back to defaults in make_config.
struct RawConfig {
    std::optional<double> length_l;
    std::optional<double> mass_mu;
    std::optional<double> hbar;
    std::optional<double> gamma;
    std::optional<double> root_tolerance;
    std::optional<int> basis_cutoff;
    std::optional<int> grid_points;
};

// Accepts the tokens "pi/2", "-pi/2" and "0" in addition to decimal literals
// so that the special boundary phases are representable exactly.
inline double parse_gamma_token(const std::string& token) {
    if (token == "0") return 0.0;
    if (token == "pi/2") return pi / 2;
    if (token == "-pi/2") return -pi / 2;
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid gamma token: " + token);
    }
    if (used != token.size())
        throw std::invalid_argument("invalid gamma token: " + token);
    return value;
}

inline SystemConfig make_config(const RawConfig& raw) {
    SystemConfig cfg;
    cfg.length_l = raw.length_l.value_or(1.0);
    cfg.mass_mu = raw.mass_mu.value_or(1.0);
    cfg.hbar = raw.hbar.value_or(1.0);
    cfg.gamma = raw.gamma.value_or(0.0);
    cfg.basis_cutoff_N = raw.basis_cutoff.value_or(512);
    cfg.grid_points_M = raw.grid_points.value_or(1024);
    cfg.root_tolerance = raw.root_tolerance.value_or(1e-12);

    if (!(cfg.length_l > 0) || !std::isfinite(cfg.length_l))
        throw std::invalid_argument("length_l must be positive");
    if (!(cfg.mass_mu > 0) || !std::isfinite(cfg.mass_mu))
        throw std::invalid_argument("mass_mu must be positive");
    if (!(cfg.hbar > 0) || !std::isfinite(cfg.hbar))
        throw std::invalid_argument("hbar must be positive");
    if (!(std::fabs(cfg.gamma) < pi))
        throw std::invalid_argument("gamma must satisfy |gamma| < pi");
    if (cfg.basis_cutoff_N < 8)
        throw std::invalid_argument("basis_cutoff must be at least 8");
    if (cfg.grid_points_M < 16)
        throw std::invalid_argument("grid_points must be at least 16");
    if (!(cfg.root_tolerance > 0))
        throw std::invalid_argument("root_tolerance must be positive");

    cfg.natural_units =
        cfg.length_l == 1.0 && cfg.mass_mu == 1.0 && cfg.hbar == 1.0;
    return cfg;
}

// Flat key=value format, one pair per line, '#' starts a comment.
inline RawConfig parse_config_text(std::istream& in) {
    RawConfig raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (strip(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = strip(line.substr(0, eq));
        std::string val = strip(line.substr(eq + 1));
        if (val.empty())
            throw std::invalid_argument("config key '" + key + "' has no value");
        auto as_double = [&](const std::string& v) {
            std::size_t used = 0;
            double x = 0;
            try {
                x = std::stod(v, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("config key '" + key +
                                            "': bad number '" + v + "'");
            }
            if (used != v.size())
                throw std::invalid_argument("config key '" + key +
                                            "': bad number '" + v + "'");
            return x;
        };
        auto as_int = [&](const std::string& v) {
            double x = as_double(v);
            int i = static_cast<int>(x);
            if (static_cast<double>(i) != x)
                throw std::invalid_argument("config key '" + key +
                                            "': expected integer, got '" + v + "'");
            return i;
        };
        if (key == "length_l") raw.length_l = as_double(val);
        else if (key == "mass_mu") raw.mass_mu = as_double(val);
        else if (key == "hbar") raw.hbar = as_double(val);
        else if (key == "gamma") raw.gamma = parse_gamma_token(val);
        else if (key == "basis_cutoff") raw.basis_cutoff = as_int(val);
        else if (key == "grid_points") raw.grid_points = as_int(val);
        else if (key == "root_tolerance") raw.root_tolerance = as_double(val);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
    return raw;
}

inline RawConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config_text(in);
}

}  // namespace ctoa
