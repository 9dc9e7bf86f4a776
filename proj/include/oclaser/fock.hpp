#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <vector>

#include "oclaser/errors.hpp"
#include "oclaser/params.hpp"

// Truncated two-mode Fock-space storage in the composite-mode basis:
// diagonal states rho(n_alpha, n_beta), fixed-offset coherence blocks
// rho(n_alpha, n_beta; n_alpha+k1, n_beta+k2), marginals and moments.

namespace oclaser {

struct FockGrid {
    int n_max_alpha = 1;  // inclusive cutoff
    int n_max_beta = 1;

    FockGrid() = default;
    FockGrid(int na, int nb) : n_max_alpha(na), n_max_beta(nb) {
        if (na < 1 || nb < 1) throw validation_error("Fock cutoffs must be >= 1");
    }

    int rows() const { return n_max_alpha + 1; }
    int cols() const { return n_max_beta + 1; }
    std::size_t size() const { return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols()); }
    std::size_t index(int na, int nb) const {
        return static_cast<std::size_t>(na) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(nb);
    }
    bool contains(int na, int nb) const {
        return na >= 0 && nb >= 0 && na <= n_max_alpha && nb <= n_max_beta;
    }
};

// Real non-negative matrix rho(n_alpha, n_beta); trace 1 when normalized.
struct DiagonalState {
    FockGrid grid;
    std::vector<double> values;  // row-major, alpha slow / beta fast

    DiagonalState() = default;
    explicit DiagonalState(const FockGrid& g) : grid(g), values(g.size(), 0.0) {}

    double& at(int na, int nb) { return values[grid.index(na, nb)]; }
    double at(int na, int nb) const { return values[grid.index(na, nb)]; }

    double trace() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    double min_entry() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    void normalize() {
        const double t = trace();
        if (!(t > 0.0)) throw solver_error("cannot normalize state with non-positive trace");
        for (double& v : values) v /= t;
    }
};

// Complex matrix rho(n_alpha, n_beta; n_alpha+k1, n_beta+k2) for a fixed
// offset. Hermiticity: only offsets with k1 > 0, or k1 = 0 and k2 >= 0, are
// stored; the (-k1,-k2) block is the elementwise conjugate.
struct CoherenceBlock {
    FockGrid grid;
    int k1 = 0;
    int k2 = 0;
    std::vector<std::complex<double>> values;

    CoherenceBlock() = default;
    CoherenceBlock(const FockGrid& g, int k1_, int k2_)
        : grid(g), k1(k1_), k2(k2_), values(g.size(), {0.0, 0.0}) {
        if (!(k1 > 0 || (k1 == 0 && k2 >= 0)))
            throw validation_error("coherence blocks store canonical offsets only (k1 > 0, or k1 = 0 and k2 >= 0)");
        if (std::abs(k1) > g.n_max_alpha || std::abs(k2) > g.n_max_beta)
            throw validation_error("coherence offset exceeds grid");
    }

    std::complex<double>& at(int na, int nb) { return values[grid.index(na, nb)]; }
    std::complex<double> at(int na, int nb) const { return values[grid.index(na, nb)]; }

    // true when the partner index (na+k1, nb+k2) lies inside the grid;
    // entries outside are identically zero
    bool in_support(int na, int nb) const { return grid.contains(na + k1, nb + k2); }

    std::complex<double> sum() const {
        std::complex<double> s{0.0, 0.0};
        for (const auto& v : values) s += v;
        return s;
    }
    // zero out entries whose partner index falls outside the grid
    void clip_support() {
        for (int a = 0; a < grid.rows(); ++a)
            for (int b = 0; b < grid.cols(); ++b)
                if (!in_support(a, b)) at(a, b) = {0.0, 0.0};
    }
};

// Diagonal sector plus any materialized coherence blocks.
struct TwoModeState {
    DiagonalState diag;
    std::vector<CoherenceBlock> blocks;

    TwoModeState() = default;
    explicit TwoModeState(const FockGrid& g) : diag(g) {}
};

enum class Mode { alpha, beta };

// Normalized marginal photon-number distribution for one composite mode.
struct PhotonDistribution {
    std::vector<double> p;

    int n_max() const { return static_cast<int>(p.size()) - 1; }
    double tail_mass() const { return p.empty() ? 0.0 : p.back(); }

    void normalize() {
        double s = 0.0;
        for (double v : p) s += v;
        if (!(s > 0.0)) throw solver_error("cannot normalize distribution with non-positive mass");
        for (double& v : p) v /= s;
    }
};

struct Moments {
    double mean = 0.0;
    double second_moment = 0.0;
};

inline DiagonalState new_vacuum(const FockGrid& grid) {
    DiagonalState s(grid);
    s.at(0, 0) = 1.0;
    return s;
}

inline PhotonDistribution marginal(const DiagonalState& state, Mode mode) {
    const double t = state.trace();
    if (std::abs(t - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "marginal requested on a state with trace " << t << " (|trace-1| > 1e-6)";
        throw solver_error(os.str());
    }
    PhotonDistribution d;
    if (mode == Mode::alpha) {
        d.p.assign(static_cast<std::size_t>(state.grid.rows()), 0.0);
        for (int a = 0; a < state.grid.rows(); ++a) {
            double s = 0.0;
            for (int b = 0; b < state.grid.cols(); ++b) s += std::max(state.at(a, b), 0.0);
            d.p[static_cast<std::size_t>(a)] = s;
        }
    } else {
        d.p.assign(static_cast<std::size_t>(state.grid.cols()), 0.0);
        for (int b = 0; b < state.grid.cols(); ++b) {
            double s = 0.0;
            for (int a = 0; a < state.grid.rows(); ++a) s += std::max(state.at(a, b), 0.0);
            d.p[static_cast<std::size_t>(b)] = s;
        }
    }
    d.normalize();
    return d;
}

inline Moments moments(const PhotonDistribution& dist) {
    Moments m;
    for (std::size_t n = 0; n < dist.p.size(); ++n) {
        const double pn = std::max(dist.p[n], 0.0);
        m.mean += static_cast<double>(n) * pn;
        m.second_moment += static_cast<double>(n) * static_cast<double>(n) * pn;
    }
    return m;
}

// Cutoff policy: mean photon number estimate from the above-threshold
// closed form, plus ten standard deviations and slack. The beta mode stays
// near vacuum, so its cutoff is a fixed default; solvers regrow on demand.
inline FockGrid suggest_grid(const DerivedCoeffs& coeffs) {
    double n_est = 0.0;
    const double ct1 = coeffs.C1_eff();
    if (coeffs.A > ct1) {
        if (!(coeffs.B > 0.0))
            throw solver_error("suggest_grid: above threshold with B = 0, no saturation scale");
        n_est = coeffs.A_eff() / coeffs.B * (coeffs.A / ct1 - 1.0);
    }
    const int na = static_cast<int>(std::ceil(n_est + 10.0 * std::sqrt(n_est + 1.0) + 20.0));
    return FockGrid(na, 15);
}

// Total-variation distance between two distributions (zero-padded to the
// longer support).
inline double total_variation(const PhotonDistribution& p, const PhotonDistribution& q) {
    const std::size_t n = std::max(p.p.size(), q.p.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.p.size() ? p.p[i] : 0.0;
        const double b = i < q.p.size() ? q.p[i] : 0.0;
        s += std::abs(a - b);
    }
    return 0.5 * s;
}

}  // namespace oclaser
