#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "oclaser/errors.hpp"

// Physical inputs and derived working coefficients for the two-mode
// open-cavity laser model. All rates are dimensionless, in units of the
// atomic escape rate Gamma (Gamma = 1 internally).

namespace oclaser {

struct LaserParams {
    double g1 = 0.0;       // atom-mode coupling, mode 1
    double g2 = 0.0;       // atom-mode coupling, mode 2
    double delta = 0.0;    // atom-reference detuning
    double gamma11 = 0.0;  // damping matrix, diagonal
    double gamma22 = 0.0;
    double gamma12 = 0.0;  // off-diagonal coupling through the common bath (= gamma21)
    double pump_rate = 0.0;

    // non-fatal diagnostics attached by validate_params()
    std::vector<std::string> warnings;

    double g_total() const { return std::hypot(g1, g2); }
    double g_squared() const { return g1 * g1 + g2 * g2; }
};

// Working constants of the composite-mode master equation.
struct DerivedCoeffs {
    double A = 0.0;   // linear gain
    double B = 0.0;   // saturation
    double C1 = 0.0;  // alpha-mode damping
    double C2 = 0.0;  // beta-mode damping
    double C3 = 0.0;  // alpha-beta cross damping
    double delta_bar = 0.0;
    double g = 0.0;   // collective coupling sqrt(g1^2+g2^2)

    // B/A = 4 (g/Gamma)^2; guarded so that a zero-pump configuration
    // (A = B = 0) yields 0 instead of NaN.
    double B_over_A() const { return A > 0.0 ? B / A : 0.0; }
    double B_over_4A() const { return B_over_A() / 4.0; }
    // effective alpha damping C1 (1 + delta_bar^2)
    double C1_eff() const { return C1 * (1.0 + delta_bar * delta_bar); }
    // effective gain A (1 + delta_bar^2)
    double A_eff() const { return A * (1.0 + delta_bar * delta_bar); }
};

// Orthogonal map from bare-mode operators (a1, a2) to composite (alpha, beta).
struct ModeTransform {
    std::array<std::array<double, 2>, 2> m{};

    double operator()(int r, int c) const { return m[static_cast<size_t>(r)][static_cast<size_t>(c)]; }
};

inline LaserParams validate_params(const LaserParams& raw) {
    if (!(raw.g1 > 0.0)) throw validation_error("g1 must be positive");
    if (!(raw.g2 > 0.0)) throw validation_error("g2 must be positive");
    if (!(raw.gamma11 > 0.0)) throw validation_error("gamma11 must be positive");
    if (!(raw.gamma22 > 0.0)) throw validation_error("gamma22 must be positive");
    if (raw.pump_rate < 0.0) throw validation_error("pump_rate must be non-negative");

    LaserParams p = raw;
    p.warnings.clear();
    const double gsq = p.g_squared();
    const double c2 = 2.0 / gsq *
                      (p.gamma11 * p.g2 * p.g2 - 2.0 * p.gamma12 * p.g1 * p.g2 + p.gamma22 * p.g1 * p.g1);
    if (c2 <= 0.0) {
        std::ostringstream os;
        os << "C2 = " << c2 << " <= 0: beta-mode damping is non-dissipative for this gamma matrix";
        p.warnings.push_back(os.str());
    }
    if (p.gamma12 * p.gamma12 > p.gamma11 * p.gamma22) {
        std::ostringstream os;
        os << "gamma12^2 = " << p.gamma12 * p.gamma12 << " exceeds gamma11*gamma22 = "
           << p.gamma11 * p.gamma22 << ": damping matrix is not positive semi-definite";
        p.warnings.push_back(os.str());
    }
    return p;
}

inline DerivedCoeffs derive_coeffs(const LaserParams& p) {
    const double gsq = p.g_squared();
    if (!(gsq > 0.0)) throw validation_error("couplings must be non-zero");
    DerivedCoeffs c;
    c.g = std::sqrt(gsq);
    c.delta_bar = p.delta;  // Gamma = 1
    c.A = 2.0 * p.pump_rate * gsq;
    c.B = 4.0 * gsq * c.A;
    c.C1 = 2.0 / gsq * (p.gamma11 * p.g1 * p.g1 + 2.0 * p.gamma12 * p.g1 * p.g2 + p.gamma22 * p.g2 * p.g2);
    c.C2 = 2.0 / gsq * (p.gamma11 * p.g2 * p.g2 - 2.0 * p.gamma12 * p.g1 * p.g2 + p.gamma22 * p.g1 * p.g1);
    c.C3 = 1.0 / gsq * ((p.gamma11 - p.gamma22) * p.g1 * p.g2 + 2.0 * p.gamma12 * (p.g2 * p.g2 - p.g1 * p.g1));
    return c;
}

inline ModeTransform composite_transform(const LaserParams& p) {
    const double g = p.g_total();
    if (!(g > 0.0)) throw validation_error("composite transform requires g > 0");
    ModeTransform t;
    t.m[0] = {p.g1 / g, p.g2 / g};
    t.m[1] = {p.g2 / g, -p.g1 / g};
    return t;
}

// Pump rate at which the composite alpha mode reaches threshold,
// A/C1 = 1 + delta_bar^2, expressed as r_th = C1 (1+delta_bar^2) / (2 g^2).
inline double threshold_pump_rate(const LaserParams& p) {
    const DerivedCoeffs c = derive_coeffs(p);
    return c.C1 * (1.0 + c.delta_bar * c.delta_bar) / (2.0 * p.g_squared());
}

}  // namespace oclaser
