#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "oclaser/errors.hpp"
#include "oclaser/params.hpp"

// Scenario configuration: flat key = value text (TOML-compatible subset),
// all rates in units of Gamma. Unknown keys are rejected. Pump is given
// either as an absolute rate (pump_rate) or as the ratio A/C1_eff
// (pump_ratio) -- exactly one of the two.

namespace oclaser {

struct ScenarioConfig {
    LaserParams params;                 // pump_rate resolved at load time
    std::optional<double> pump_ratio;   // as given, for reporting
    std::optional<int> n_max_alpha;
    std::optional<int> n_max_beta;
    double tol_steady = 1e-8;
    int max_iter = 200;
    double rtol_integrate = 1e-8;
    std::string out_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw validation_error("config: value of '" + key + "' is not a number: " + v);
    }
    if (pos != v.size()) throw validation_error("config: trailing characters in value of '" + key + "'");
    return d;
}

}  // namespace detail

inline ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::optional<double> pump_rate, pump_ratio;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected key = value";
            throw validation_error(os.str());
        }
        const std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);

        if (key == "g1") cfg.params.g1 = detail::parse_double(key, value);
        else if (key == "g2") cfg.params.g2 = detail::parse_double(key, value);
        else if (key == "delta") cfg.params.delta = detail::parse_double(key, value);
        else if (key == "gamma11") cfg.params.gamma11 = detail::parse_double(key, value);
        else if (key == "gamma22") cfg.params.gamma22 = detail::parse_double(key, value);
        else if (key == "gamma12") cfg.params.gamma12 = detail::parse_double(key, value);
        else if (key == "pump_rate") pump_rate = detail::parse_double(key, value);
        else if (key == "pump_ratio") pump_ratio = detail::parse_double(key, value);
        else if (key == "n_max_alpha") cfg.n_max_alpha = static_cast<int>(detail::parse_double(key, value));
        else if (key == "n_max_beta") cfg.n_max_beta = static_cast<int>(detail::parse_double(key, value));
        else if (key == "tol_steady") cfg.tol_steady = detail::parse_double(key, value);
        else if (key == "max_iter") cfg.max_iter = static_cast<int>(detail::parse_double(key, value));
        else if (key == "rtol_integrate") cfg.rtol_integrate = detail::parse_double(key, value);
        else if (key == "out_dir") cfg.out_dir = value;
        else throw validation_error("config: unknown key '" + key + "'");
    }
    if (pump_rate.has_value() == pump_ratio.has_value())
        throw validation_error("config: exactly one of pump_rate or pump_ratio is required");
    if (!(cfg.tol_steady > 0.0) || !(cfg.rtol_integrate > 0.0))
        throw validation_error("config: solver tolerances must be positive");
    if (cfg.max_iter < 1) throw validation_error("config: max_iter must be >= 1");

    // resolve pump_ratio -> absolute rate against this configuration's
    // threshold, then validate
    if (pump_ratio) {
        cfg.pump_ratio = pump_ratio;
        LaserParams probe = cfg.params;
        probe.pump_rate = 0.0;
        probe = validate_params(probe);
        cfg.params.pump_rate = *pump_ratio * threshold_pump_rate(probe);
    } else {
        cfg.params.pump_rate = *pump_rate;
    }
    cfg.params = validate_params(cfg.params);
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config_text(os.str());
}

// Sweep over one parameter of the scenario.
struct SweepSpec {
    std::string parameter;  // pump_rate | gamma12
    double from = 0.0;
    double to = 0.0;
    int steps = 2;
    bool log_scale = false;

    void validate() const {
        if (parameter != "pump_rate" && parameter != "gamma12")
            throw validation_error("sweep parameter must be pump_rate or gamma12");
        if (!(from < to)) throw validation_error("sweep requires from < to");
        if (steps < 2) throw validation_error("sweep requires steps >= 2");
        if (log_scale && !(from > 0.0)) throw validation_error("log-scale sweep requires from > 0");
    }

    double value_at(int i) const {
        const double t = static_cast<double>(i) / (steps - 1);
        if (log_scale) return from * std::pow(to / from, t);
        return from + (to - from) * t;
    }
};

}  // namespace oclaser
