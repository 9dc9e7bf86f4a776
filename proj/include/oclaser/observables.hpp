#pragma once

#include <cassert>
#include <cmath>
#include <sstream>
#include <vector>

#include "oclaser/fock.hpp"
#include "oclaser/params.hpp"
#include "oclaser/steady.hpp"

// Derived physical quantities and closed-form limits: Mandel Q, g2(0),
// weak/strong-pump distributions, above-threshold mean, linewidth,
// frequency shift, Petermann factor and the threshold curve.

namespace oclaser {

inline double mandel_q(const PhotonDistribution& dist) {
    const Moments m = moments(dist);
    if (!(m.mean > 0.0)) throw solver_error("Mandel Q undefined for zero mean photon number");
    return (m.second_moment - m.mean * m.mean) / m.mean - 1.0;
}

inline double g2_zero(const PhotonDistribution& dist) {
    const Moments m = moments(dist);
    if (!(m.mean > 0.0)) throw solver_error("g2(0) undefined for zero mean photon number");
    return mandel_q(dist) / m.mean + 1.0;
}

// Boltzmann factor of the below-threshold thermal law,
// exp(-hbar w / kB T) = A / C1_eff.
inline double weak_pump_boltzmann_factor(const DerivedCoeffs& c) { return c.A / c.C1_eff(); }

// p(n) = (1 - x) x^n with x = A/C1_eff, below threshold.
inline PhotonDistribution analytic_weak_pump(const DerivedCoeffs& c, int n_max) {
    const double x = weak_pump_boltzmann_factor(c);
    if (!(x < 1.0)) throw solver_error("weak-pump law not applicable at or above threshold");
    PhotonDistribution d;
    d.p.resize(static_cast<std::size_t>(n_max) + 1);
    double v = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        d.p[static_cast<std::size_t>(n)] = v;
        v *= x;
    }
    d.normalize();
    return d;
}

// p(n) ~ (A^2/BC1)^n / (n + A_eff/B)!  normalized in log space, above
// threshold; the factorial of the real offset goes through lgamma.
inline PhotonDistribution analytic_strong_pump(const DerivedCoeffs& c, int n_max) {
    if (!(c.A > c.C1_eff())) throw solver_error("strong-pump law not applicable below threshold");
    if (!(c.B > 0.0)) throw solver_error("strong-pump law requires B > 0");
    const double ab = c.A_eff() / c.B;
    const double logr = std::log(c.A * c.A / (c.B * c.C1));
    PhotonDistribution d;
    d.p.resize(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> logp(d.p.size());
    double lmax = -1e300;
    for (int n = 0; n <= n_max; ++n) {
        logp[static_cast<std::size_t>(n)] = n * logr - std::lgamma(n + ab + 1.0);
        lmax = std::max(lmax, logp[static_cast<std::size_t>(n)]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < logp.size(); ++i) {
        d.p[i] = std::exp(logp[i] - lmax);
        sum += d.p[i];
    }
    for (double& v : d.p) v /= sum;
    return d;
}

// nbar = (A_eff/B)(A/C1_eff - 1), far above threshold.
inline double analytic_nbar(const DerivedCoeffs& c) {
    const double ct1 = c.C1_eff();
    if (!(c.A > ct1)) throw solver_error("analytic mean not applicable below threshold");
    if (!(c.B > 0.0)) throw solver_error("analytic mean requires B > 0");
    return c.A_eff() / c.B * (c.A / ct1 - 1.0);
}

// Full linewidth 2 D_alpha of the emission line (twice the decay rate of the
// first alpha coherence block):
//   2D = (1/4) [ (A/(nbar+1) + 2B) / (1 + db^2 + (B/A)(nbar+3/2) + (B/4A)^2)
//               + C1/nbar ].
inline double linewidth(const DerivedCoeffs& c, double nbar_alpha) {
    if (!(nbar_alpha > 0.0)) throw solver_error("linewidth requires nbar_alpha > 0");
    const double den = 1.0 + c.delta_bar * c.delta_bar + c.B_over_A() * (nbar_alpha + 1.5) +
                       c.B_over_4A() * c.B_over_4A();
    return 0.25 * ((c.A / (nbar_alpha + 1.0) + 2.0 * c.B) / den + c.C1 / nbar_alpha);
}

// Shift of the laser frequency relative to the reference,
//   Delta_alpha = -(A db/2) / (1 + db^2 + (B/A)(nbar+3/2) + (B/4A)^2).
inline double freq_shift(const DerivedCoeffs& c, double nbar_alpha) {
    if (nbar_alpha < 0.0) throw solver_error("freq_shift requires nbar_alpha >= 0");
    const double den = 1.0 + c.delta_bar * c.delta_bar + c.B_over_A() * (nbar_alpha + 1.5) +
                       c.B_over_4A() * c.B_over_4A();
    return -(c.A * c.delta_bar / 2.0) / den;
}

enum class PetermannMode { numeric, asymptotic };

namespace detail {

inline double self_consistent_nbar(const LaserParams& params, double pump_rate) {
    LaserParams p = params;
    p.pump_rate = pump_rate;
    const DerivedCoeffs c = derive_coeffs(p);
    if (!(c.A > c.C1_eff())) {
        std::ostringstream os;
        os << "configuration below threshold at pump rate " << pump_rate << " (A/C1_eff = "
           << c.A / c.C1_eff() << ")";
        throw solver_error(os.str());
    }
    try {
        return self_consistent_solve(c, suggest_grid(c)).nbar_alpha;
    } catch (const solver_error&) {
        // The beta channel can be unsolvable (braced factor or M non-positive,
        // e.g. when C2 <= 0). The alpha mean is all the linewidth needs, so
        // fall back to the alpha recurrence with the beta mode pinned empty.
        FockGrid grid = suggest_grid(c);
        for (int attempt = 0;; ++attempt) {
            try {
                return moments(solve_alpha_recurrence(c, 0.0, grid)).mean;
            } catch (const grid_error&) {
                if (attempt >= 3) throw;
                grid = FockGrid(grid.n_max_alpha * 2, grid.n_max_beta);
            }
        }
    }
}

}  // namespace detail

// Excess line broadening K = D(gamma12)/D(0) at a common pump rate.
// numeric: both linewidths from the recurrence steady state (optionally the
// analytic mean); asymptotic: the closed form
//   K = C1' (A+C1') (A-C1) / [ C1 (A-C1') (A+C1) ],  C1' = C1(gamma12).
inline double petermann(const LaserParams& params, double pump_rate, PetermannMode mode,
                        bool use_analytic_nbar = false) {
    LaserParams open = params;
    open.pump_rate = pump_rate;
    LaserParams closed = open;
    closed.gamma12 = 0.0;
    const DerivedCoeffs co = derive_coeffs(open);
    const DerivedCoeffs cc = derive_coeffs(closed);
    if (!(co.A > co.C1_eff()) || !(cc.A > cc.C1_eff()))
        throw solver_error("Petermann factor requires both configurations above threshold");

    if (mode == PetermannMode::asymptotic) {
        const double a = co.A;
        const double c1p = co.C1;
        const double c1 = cc.C1;
        return c1p * (a + c1p) * (a - c1) / (c1 * (a - c1p) * (a + c1));
    }
    const double nb_open = use_analytic_nbar ? analytic_nbar(co)
                                             : detail::self_consistent_nbar(open, pump_rate);
    const double nb_closed = use_analytic_nbar ? analytic_nbar(cc)
                                               : detail::self_consistent_nbar(closed, pump_rate);
    return linewidth(co, nb_open) / linewidth(cc, nb_closed);
}

struct ThresholdPoint {
    double gamma12 = 0.0;
    double r_th = 0.0;
};

inline std::vector<ThresholdPoint> threshold_curve(const LaserParams& params,
                                                   const std::vector<double>& gamma12_grid) {
    std::vector<ThresholdPoint> out;
    out.reserve(gamma12_grid.size());
    for (double g12 : gamma12_grid) {
        LaserParams p = params;
        p.gamma12 = g12;
        out.push_back({g12, threshold_pump_rate(p)});
    }
    return out;
}

// Scalar summary of one steady solve.
struct ObservableReport {
    double pump_rate = 0.0;
    double pump_ratio = 0.0;  // A / C1_eff
    double nbar_alpha = 0.0;
    double nbar_beta = 0.0;
    double mandel_q_alpha = 0.0;
    double g2_alpha = 0.0;
    double linewidth_2D = 0.0;   // NaN below threshold / zero mean
    double freq_shift = 0.0;
    double petermann_K = 0.0;    // NaN when either pair configuration is below threshold
    DerivedCoeffs coeffs;
};

inline ObservableReport make_report(const LaserParams& params, const DerivedCoeffs& c,
                                    const SelfConsistentSolution& sol,
                                    bool with_petermann = true) {
    ObservableReport r;
    r.pump_rate = params.pump_rate;
    r.pump_ratio = c.A / c.C1_eff();
    r.nbar_alpha = sol.nbar_alpha;
    r.nbar_beta = sol.nbar_beta;
    r.coeffs = c;
    const double nan = std::nan("");
    if (sol.nbar_alpha > 0.0) {
        r.mandel_q_alpha = mandel_q(sol.p_alpha);
        r.g2_alpha = g2_zero(sol.p_alpha);
        assert(std::abs(r.g2_alpha - (r.mandel_q_alpha / r.nbar_alpha + 1.0)) <= 1e-12);
        r.linewidth_2D = linewidth(c, sol.nbar_alpha);
        r.freq_shift = oclaser::freq_shift(c, sol.nbar_alpha);
    } else {
        r.mandel_q_alpha = nan;
        r.g2_alpha = nan;
        r.linewidth_2D = nan;
        r.freq_shift = nan;
    }
    r.petermann_K = nan;
    if (with_petermann && params.gamma12 != 0.0) {
        try {
            r.petermann_K = petermann(params, params.pump_rate, PetermannMode::numeric);
        } catch (const solver_error&) {
            // below threshold in one of the configurations; leave NaN
        }
    } else if (with_petermann && params.gamma12 == 0.0 && c.A > c.C1_eff()) {
        r.petermann_K = 1.0;
    }
    return r;
}

}  // namespace oclaser
