#pragma once

#include <cmath>
#include <sstream>

#include "oclaser/errors.hpp"
#include "oclaser/params.hpp"

// The M and K factors entering the C3^2 corrections of the diagonal master
// equation and the steady-state recurrences. Arguments are real (the
// factorization approximation replaces integers by means), and M must be
// positive wherever K is queried.

namespace oclaser {

inline double m_factor(double n_alpha, double n_beta, const DerivedCoeffs& c) {
    const double ba = c.B_over_A();
    const double den = 1.0 + c.delta_bar * c.delta_bar + ba * (n_alpha + 0.5) + c.B_over_4A() * c.B_over_4A();
    return (c.A * (n_alpha + 0.5) + c.B / 4.0) / den + c.C1 * (n_alpha - 0.5) + c.C2 * (n_beta - 0.5);
}

inline double k_factor(double n_alpha, double n_beta, const DerivedCoeffs& c) {
    const double m = m_factor(n_alpha, n_beta, c);
    if (!(m > 0.0)) {
        std::ostringstream os;
        os << "M(" << n_alpha << ", " << n_beta << ") = " << m
           << " <= 0: degenerate regime, K factor undefined";
        throw solver_error(os.str());
    }
    const double ba = c.B_over_A();
    const double den = 1.0 + c.delta_bar * c.delta_bar + ba * (n_alpha + 0.5) + c.B_over_4A() * c.B_over_4A();
    const double corr = 0.5 * c.delta_bar * c.A;
    return m + corr * corr / (den * den) / m;
}

}  // namespace oclaser
