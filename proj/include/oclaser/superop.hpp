#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "oclaser/fock.hpp"
#include "oclaser/params.hpp"
#include "oclaser/quadrature.hpp"

// Physical building blocks of the master equation: the single-atom kick
// super-operator Lambda(tau), the exponential-time-averaged gain kernel
// (closed form and quadrature routes), the bare-mode loss super-operator,
// and the basis-rotation cross-check of the composite damping coefficients.

namespace oclaser {

using cplx = std::complex<double>;

// Diagonal tables of phi(n) = g sqrt(n+1+(delta/2g)^2) and, at a given tau,
// of Phi_- (alpha-number-diagonal) and sin(phi tau)/phi.
struct KickOperators {
    double g = 0.0;
    double delta = 0.0;
    std::vector<double> phi;  // phi(n), n = 0..n_max

    KickOperators(double g_, double delta_, int n_max) : g(g_), delta(delta_) {
        if (!(g > 0.0)) throw validation_error("kick operator requires g > 0");
        phi.resize(static_cast<std::size_t>(n_max) + 1);
        const double off = (delta / (2.0 * g)) * (delta / (2.0 * g));
        for (int n = 0; n <= n_max; ++n)
            phi[static_cast<std::size_t>(n)] = g * std::sqrt(n + 1.0 + off);
    }

    cplx phi_minus(int n, double tau) const {
        const double ph = phi[static_cast<std::size_t>(n)];
        return {std::cos(ph * tau), -0.5 * delta * tau * sinc(ph * tau)};
    }
    // sin(phi(n) tau)/phi(n)
    double sin_over_phi(int n, double tau) const {
        const double ph = phi[static_cast<std::size_t>(n)];
        return tau * sinc(ph * tau);
    }
};

namespace detail {

inline void check_top_level(const TwoModeState& state) {
    const FockGrid& g = state.diag.grid;
    double top = 0.0;
    for (int b = 0; b < g.cols(); ++b) top += std::abs(state.diag.at(g.n_max_alpha, b));
    for (const auto& blk : state.blocks)
        for (int b = 0; b < g.cols(); ++b) top += std::abs(blk.at(g.n_max_alpha, b));
    if (top > 1e-10) {
        std::ostringstream os;
        os << "kick would overflow the alpha cutoff: top-level population " << top;
        throw solver_error(os.str());
    }
}

}  // namespace detail

// Applies Lambda(tau) rho = Phi_- rho Phi_+ + g^2 A^dag [sin(phi tau)/phi] rho
// [sin(phi tau)/phi] A in the composite basis (A acts on the alpha mode only).
// Trace preserving; the beta mode is a spectator.
inline TwoModeState lambda_kick(const TwoModeState& state, double tau, const LaserParams& params) {
    if (tau < 0.0) throw validation_error("lambda_kick requires tau >= 0");
    detail::check_top_level(state);

    const FockGrid& grid = state.diag.grid;
    const double g = params.g_total();
    KickOperators kick(g, params.delta, grid.n_max_alpha);

    TwoModeState out(grid);
    out.blocks.reserve(state.blocks.size());

    // diagonal sector: [Lambda rho]_{n,n} = |Phi_-(n)|^2 rho_n + g^2 n s(n-1)^2 rho_{n-1}
    for (int a = 0; a < grid.rows(); ++a) {
        const double amp = std::norm(kick.phi_minus(a, tau));
        for (int b = 0; b < grid.cols(); ++b) {
            double v = amp * state.diag.at(a, b);
            if (a >= 1) {
                const double s = kick.sin_over_phi(a - 1, tau);
                v += g * g * a * s * s * state.diag.at(a - 1, b);
            }
            out.diag.at(a, b) = v;
        }
    }
    // coherence blocks: columns are shifted by (k1,k2) in the same way
    for (const auto& blk : state.blocks) {
        CoherenceBlock ob(grid, blk.k1, blk.k2);
        for (int a = 0; a < grid.rows(); ++a) {
            const int ma = a + blk.k1;
            if (ma < 0 || ma > grid.n_max_alpha) continue;
            const cplx coef = kick.phi_minus(a, tau) * std::conj(kick.phi_minus(ma, tau));
            for (int b = 0; b < grid.cols(); ++b) {
                if (!ob.in_support(a, b)) continue;
                cplx v = coef * blk.at(a, b);
                if (a >= 1 && ma >= 1) {
                    const double s = kick.sin_over_phi(a - 1, tau) * kick.sin_over_phi(ma - 1, tau);
                    v += g * g * std::sqrt(static_cast<double>(a) * static_cast<double>(ma)) * s *
                         blk.at(a - 1, b);
                }
                ob.at(a, b) = v;
            }
        }
        out.blocks.push_back(std::move(ob));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gain kernel: entrywise coefficients of the pump term
//   r int_0^inf dtau Gamma e^{-Gamma tau} [Lambda(tau) - 1]
// acting on rho_{n_alpha, m_alpha} (beta untouched):
//   [L rho]_{n,m} = self(n,m) rho_{n,m} + in(n,m) rho_{n-1,m-1}.
// ---------------------------------------------------------------------------

enum class GainProvenance { closed_form, quadrature };

struct GainKernel {
    int n_max = 0;
    GainProvenance provenance = GainProvenance::closed_form;
    // row-major (n_max+1)^2 tables
    std::vector<cplx> in_coef;
    std::vector<cplx> self_coef;

    cplx in(int n, int m) const { return in_coef[static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m)]; }
    cplx self(int n, int m) const { return self_coef[static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m)]; }
};

// Closed forms (the tau integral done analytically):
//   in(n,m)  =  A sqrt(nm) / (1 + db^2 + (B/2A)(n+m) + (B/4A)^2 (n-m)^2)
//   self(n,m) = -[A(n+m+2)/2 + i A db (n-m)/2 + B (n-m)^2/8]
//               / (1 + db^2 + (B/2A)(n+m+2) + (B/4A)^2 (n-m)^2)
inline cplx gain_in_closed(int n, int m, const DerivedCoeffs& c) {
    if (n < 1 || m < 1) return {0.0, 0.0};
    const double db2 = c.delta_bar * c.delta_bar;
    const double d = n - m;
    const double den = 1.0 + db2 + 0.5 * c.B_over_A() * (n + m) + c.B_over_4A() * c.B_over_4A() * d * d;
    return {c.A * std::sqrt(static_cast<double>(n) * static_cast<double>(m)) / den, 0.0};
}

inline cplx gain_self_closed(int n, int m, const DerivedCoeffs& c) {
    const double db2 = c.delta_bar * c.delta_bar;
    const double d = n - m;
    const double den = 1.0 + db2 + 0.5 * c.B_over_A() * (n + m + 2) + c.B_over_4A() * c.B_over_4A() * d * d;
    const cplx num{c.A * (n + m + 2) / 2.0 + c.B * d * d / 8.0, c.A * c.delta_bar * d / 2.0};
    return -num / den;
}

inline GainKernel build_gain_kernel_closed(const DerivedCoeffs& c, int n_max) {
    GainKernel k;
    k.n_max = n_max;
    k.provenance = GainProvenance::closed_form;
    k.in_coef.assign(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1), {0.0, 0.0});
    k.self_coef = k.in_coef;
    for (int n = 0; n <= n_max; ++n)
        for (int m = 0; m <= n_max; ++m) {
            k.in_coef[static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m)] = gain_in_closed(n, m, c);
            k.self_coef[static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m)] = gain_self_closed(n, m, c);
        }
    return k;
}

namespace detail {

// Reconstructs (g, r) from the derived coefficients (Gamma = 1):
// B/A = 4 g^2 and A = 2 r g^2.
inline std::pair<double, double> g_and_r(const DerivedCoeffs& c) {
    const double gsq = c.g * c.g;
    if (!(gsq > 0.0)) throw validation_error("gain quadrature requires g > 0");
    return {std::sqrt(gsq), c.A / (2.0 * gsq)};
}

// one Gauss-Laguerre pass at a fixed order; x = Gamma tau
inline GainKernel gain_kernel_quadrature_order(const DerivedCoeffs& c, int n_max, int order) {
    auto [g, r] = g_and_r(c);
    const QuadratureRule& rule = gauss_laguerre(order);
    KickOperators kick(g, c.delta_bar, n_max);

    GainKernel k;
    k.n_max = n_max;
    k.provenance = GainProvenance::quadrature;
    k.in_coef.assign(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1), {0.0, 0.0});
    k.self_coef = k.in_coef;

    std::vector<cplx> phim(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> sop(static_cast<std::size_t>(n_max) + 1);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = rule.nodes[q];
        const double w = rule.weights[q];
        for (int n = 0; n <= n_max; ++n) {
            phim[static_cast<std::size_t>(n)] = kick.phi_minus(n, tau);
            sop[static_cast<std::size_t>(n)] = kick.sin_over_phi(n, tau);
        }
        for (int n = 0; n <= n_max; ++n)
            for (int m = 0; m <= n_max; ++m) {
                const std::size_t i = static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m);
                k.self_coef[i] += w * (phim[static_cast<std::size_t>(n)] * std::conj(phim[static_cast<std::size_t>(m)]));
                if (n >= 1 && m >= 1)
                    k.in_coef[i] += w * g * g *
                                    std::sqrt(static_cast<double>(n) * static_cast<double>(m)) *
                                    sop[static_cast<std::size_t>(n - 1)] * sop[static_cast<std::size_t>(m - 1)];
            }
    }
    for (int n = 0; n <= n_max; ++n)
        for (int m = 0; m <= n_max; ++m) {
            const std::size_t i = static_cast<std::size_t>(n) * (n_max + 1u) + static_cast<std::size_t>(m);
            k.self_coef[i] = r * (k.self_coef[i] - 1.0);
            k.in_coef[i] *= r;
        }
    return k;
}

inline double kernel_distance(const GainKernel& a, const GainKernel& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.in_coef.size(); ++i) {
        const double s1 = std::abs(a.in_coef[i] - b.in_coef[i]) / (1.0 + std::abs(b.in_coef[i]));
        const double s2 = std::abs(a.self_coef[i] - b.self_coef[i]) / (1.0 + std::abs(b.self_coef[i]));
        worst = std::max(worst, std::max(s1, s2));
    }
    return worst;
}

}  // namespace detail

// Gauss-Laguerre evaluation of the tau average, order-doubled from 64 until
// the kernel is stable to relative 1e-8.
inline GainKernel build_gain_kernel_quadrature(const DerivedCoeffs& c, int n_max) {
    constexpr int kMaxOrder = 1024;
    GainKernel prev = detail::gain_kernel_quadrature_order(c, n_max, 64);
    for (int order = 128; order <= kMaxOrder; order *= 2) {
        GainKernel next = detail::gain_kernel_quadrature_order(c, n_max, order);
        if (detail::kernel_distance(next, prev) < 1e-8) return next;
        prev = std::move(next);
    }
    throw solver_error("gain quadrature did not stabilize to 1e-8 by order 1024");
}

// Derivative contribution of the pump term, evaluated through the quadrature
// kernel (diagonal sector and any stored blocks).
inline TwoModeState gain_quadrature(const TwoModeState& state, const DerivedCoeffs& c) {
    const FockGrid& grid = state.diag.grid;
    TwoModeState out(grid);
    if (!(c.A > 0.0)) {
        for (const auto& blk : state.blocks) out.blocks.emplace_back(grid, blk.k1, blk.k2);
        return out;  // zero pump: identically zero
    }
    const GainKernel k = build_gain_kernel_quadrature(c, grid.n_max_alpha);
    for (int a = 0; a < grid.rows(); ++a)
        for (int b = 0; b < grid.cols(); ++b) {
            double v = k.self(a, a).real() * state.diag.at(a, b);
            if (a >= 1) v += k.in(a, a).real() * state.diag.at(a - 1, b);
            out.diag.at(a, b) = v;
        }
    for (const auto& blk : state.blocks) {
        CoherenceBlock ob(grid, blk.k1, blk.k2);
        for (int a = 0; a < grid.rows(); ++a) {
            const int ma = a + blk.k1;
            if (ma < 0 || ma > grid.n_max_alpha) continue;
            for (int b = 0; b < grid.cols(); ++b) {
                if (!ob.in_support(a, b)) continue;
                cplx v = k.self(a, ma) * blk.at(a, b);
                if (a >= 1 && ma >= 1) v += k.in(a, ma) * blk.at(a - 1, b);
                ob.at(a, b) = v;
            }
        }
        out.blocks.push_back(std::move(ob));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bare-basis loss super-operator and the composite-basis rotation.
// ---------------------------------------------------------------------------

// Full (dense, complex) two-mode density matrix in the bare (a1, a2) basis;
// intended for small grids.
struct BareDensityMatrix {
    int n1_max = 1;
    int n2_max = 1;
    Eigen::MatrixXcd rho;

    BareDensityMatrix(int n1, int n2) : n1_max(n1), n2_max(n2) {
        const int d = dim();
        rho = Eigen::MatrixXcd::Zero(d, d);
    }
    int dim() const { return (n1_max + 1) * (n2_max + 1); }
    int index(int n1, int n2) const { return n1 * (n2_max + 1) + n2; }
};

namespace detail {

// annihilation operator for one bare mode on the truncated product space
inline Eigen::MatrixXcd bare_annihilation(const BareDensityMatrix& s, int which) {
    const int d = s.dim();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n1 = 0; n1 <= s.n1_max; ++n1)
        for (int n2 = 0; n2 <= s.n2_max; ++n2) {
            if (which == 1 && n1 >= 1) a(s.index(n1 - 1, n2), s.index(n1, n2)) = std::sqrt(static_cast<double>(n1));
            if (which == 2 && n2 >= 1) a(s.index(n1, n2 - 1), s.index(n1, n2)) = std::sqrt(static_cast<double>(n2));
        }
    return a;
}

}  // namespace detail

// d rho / dt from the four Lindblad-form loss terms with gamma21 = gamma12:
//   sum_{ll'} gamma_{ll'} (2 a_l' rho a_l^dag - rho a_l^dag a_l' - a_l^dag a_l' rho)
inline BareDensityMatrix loss_apply_bare(const BareDensityMatrix& state, const LaserParams& params) {
    const Eigen::MatrixXcd a1 = detail::bare_annihilation(state, 1);
    const Eigen::MatrixXcd a2 = detail::bare_annihilation(state, 2);
    const Eigen::MatrixXcd a1d = a1.adjoint();
    const Eigen::MatrixXcd a2d = a2.adjoint();

    auto term = [&](const Eigen::MatrixXcd& al, const Eigen::MatrixXcd& ald,
                    const Eigen::MatrixXcd& alp) {
        return 2.0 * alp * state.rho * ald - state.rho * ald * alp - ald * alp * state.rho;
    };

    BareDensityMatrix out(state.n1_max, state.n2_max);
    out.rho = params.gamma11 * term(a1, a1d, a1) + params.gamma12 * term(a1, a1d, a2) +
              params.gamma12 * term(a2, a2d, a1) + params.gamma22 * term(a2, a2d, a2);
    return out;
}

// Composite-basis damping coefficients gamma' = O gamma O^T with O the mode
// transform. 2 c_aa and 2 c_bb reproduce C1 and C2 exactly; 2 c_ab is a
// diagnostic against the printed C3 (they differ; see diagnostics in report
// output).
struct CompositeDamping {
    double c_aa = 0.0;
    double c_bb = 0.0;
    double c_ab = 0.0;
};

inline CompositeDamping rotate_loss_to_composite(const LaserParams& p) {
    const ModeTransform o = composite_transform(p);
    const double gmat[2][2] = {{p.gamma11, p.gamma12}, {p.gamma12, p.gamma22}};
    double rot[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) rot[i][j] += o(i, k) * gmat[k][l] * o(j, l);
    return {rot[0][0], rot[1][1], rot[0][1]};
}

}  // namespace oclaser
