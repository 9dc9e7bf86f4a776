#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "oclaser/csv.hpp"
#include "oclaser/observables.hpp"
#include "oclaser/runner.hpp"
#include "oclaser/superop.hpp"

// The validation suite: every acceptance check of the artifact, runnable both
// from the CLI (`validate` subcommand) and from the standalone acceptance
// binary. Each check pins its tolerance in code and reports the measured
// value next to it.

namespace oclaser {

struct CheckResult {
    int criterion = 0;
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string comparison;  // "<=", ">=", "in-range", ...
    bool pass = false;
    double seconds = 0.0;
};

namespace checks {

inline LaserParams fig1_params(double pump_rate = 0.0) {
    LaserParams p;
    p.g1 = 0.05;
    p.g2 = 0.07;
    p.delta = 3.0;
    p.gamma11 = 6.0;
    p.gamma22 = 5.0;
    p.gamma12 = 5.5;
    p.pump_rate = pump_rate;
    return validate_params(p);
}

// same gamma matrix with the couplings rescaled so that B/A = 4 g^2 takes a
// chosen value (the C coefficients are scale invariant)
inline LaserParams fig1_scaled(double four_g_sq, double pump_rate, double delta = 3.0) {
    LaserParams p = fig1_params();
    const double s = std::sqrt((four_g_sq / 4.0) / p.g_squared());
    p.g1 *= s;
    p.g2 *= s;
    p.delta = delta;
    p.pump_rate = pump_rate;
    return validate_params(p);
}

inline DerivedCoeffs coeffs_at_ratio(const LaserParams& base, double ratio) {
    LaserParams p = base;
    p.pump_rate = ratio * threshold_pump_rate(base);
    return derive_coeffs(p);
}

}  // namespace checks

class ValidationSuite {
public:
    explicit ValidationSuite(std::ostream& log) : log_(log) {}

    std::vector<CheckResult> run_all() {
        criterion_1_thermal_limit();
        criterion_2_above_threshold_mean();
        criterion_3_fluctuations();
        criterion_4_beta_suppression();
        criterion_5_oracle_equivalence();
        criterion_6_gain_derivation_chain();
        criterion_7_linewidth_and_frequency();
        criterion_8_petermann();
        criterion_9_threshold_curve();
        criterion_10_structural_invariants();
        return results_;
    }

    bool all_passed() const {
        for (const auto& r : results_)
            if (!r.pass) return false;
        return true;
    }

    void write_csv(const std::string& path) const {
        CsvTable t;
        t.header = {"criterion", "check", "measured", "tolerance", "comparison", "verdict", "seconds"};
        for (const auto& r : results_)
            t.add_row({std::to_string(r.criterion), r.name, fmt_real(r.measured), fmt_real(r.tolerance),
                       r.comparison, r.pass ? "pass" : "fail", fmt_real(r.seconds)});
        t.write(path);
    }

private:
    std::ostream& log_;
    std::vector<CheckResult> results_;
    std::chrono::steady_clock::time_point t0_;

    void begin() { t0_ = std::chrono::steady_clock::now(); }

    void record(int criterion, const std::string& name, double measured, double tolerance,
                const std::string& cmp, bool pass) {
        CheckResult r;
        r.criterion = criterion;
        r.name = name;
        r.measured = measured;
        r.tolerance = tolerance;
        r.comparison = cmp;
        r.pass = pass;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        results_.push_back(r);
        log_ << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << " " << name
             << ": measured = " << measured << ", tolerance " << cmp << " " << tolerance << "  ("
             << std::fixed << std::setprecision(2) << r.seconds << " s)" << std::defaultfloat
             << std::setprecision(6) << "\n";
        begin();
    }

    void le(int c, const std::string& n, double measured, double tol) {
        record(c, n, measured, tol, "<=", measured <= tol);
    }
    void in_range(int c, const std::string& n, double measured, double lo, double hi) {
        record(c, n + " (range [" + fmt_real(lo) + ", " + fmt_real(hi) + "])", measured, hi,
               "in-range", measured >= lo && measured <= hi);
    }

    // 1. Thermal limit: below threshold the recurrence reduces to the
    // geometric law in the linear limit, and stays close to it with the
    // physical saturation and cross-damping.
    void criterion_1_thermal_limit() {
        begin();
        const LaserParams base = checks::fig1_params();
        const DerivedCoeffs phys = checks::coeffs_at_ratio(base, 0.5);

        DerivedCoeffs limit = phys;   // the linear-limit coefficients of the thermal law
        limit.B = 0.0;
        limit.C3 = 0.0;
        const FockGrid grid = suggest_grid(limit);
        const SelfConsistentSolution sol = self_consistent_solve(limit, grid);
        const PhotonDistribution geom = analytic_weak_pump(limit, sol.p_alpha.n_max());
        le(1, "thermal limit (B=0, C3=0): TV vs geometric law", total_variation(sol.p_alpha, geom),
           1e-3);

        const SelfConsistentSolution sol_phys = self_consistent_solve(phys, suggest_grid(phys));
        const PhotonDistribution geom2 = analytic_weak_pump(phys, sol_phys.p_alpha.n_max());
        le(1, "thermal proximity (physical B, C3): TV vs geometric law",
           total_variation(sol_phys.p_alpha, geom2), 5e-2);

        // diagnostic only: forcing B = 0 while keeping the C3 channel leaves
        // the cross-damping corrections in place
        DerivedCoeffs b0 = phys;
        b0.B = 0.0;
        const SelfConsistentSolution sol_b0 = self_consistent_solve(b0, suggest_grid(b0));
        const PhotonDistribution geom3 = analytic_weak_pump(b0, sol_b0.p_alpha.n_max());
        log_ << "[info] criterion 1 diagnostic: TV with B=0 but C3 active = "
             << total_variation(sol_b0.p_alpha, geom3)
             << " (not gated; the cross-damping corrections shift the below-threshold law)\n";
        begin();
    }

    // 2. Above-threshold mean photon number.
    void criterion_2_above_threshold_mean() {
        begin();
        const LaserParams base = checks::fig1_params();
        const DerivedCoeffs c = checks::coeffs_at_ratio(base, 2.0);
        const SelfConsistentSolution sol = self_consistent_solve(c, suggest_grid(c));
        const double expected = 337.8378378378378;  // (1 + delta_bar^2) / (4 g^2)
        le(2, "above-threshold mean: |nbar_alpha/337.8378 - 1|",
           std::abs(sol.nbar_alpha / expected - 1.0), 0.02);
        le(2, "above-threshold alpha tail mass", sol.p_alpha.tail_mass(), 1e-8);
    }

    // 3. Photon-number fluctuations: Mandel Q below threshold, g2(0) window
    // boundaries, and monotone decrease across a pump sweep.
    void criterion_3_fluctuations() {
        begin();
        const LaserParams base = checks::fig1_params();
        DerivedCoeffs b0 = checks::coeffs_at_ratio(base, 0.5);
        b0.B = 0.0;  // linear regime of the below-threshold closed form
        const SelfConsistentSolution sol = self_consistent_solve(b0, suggest_grid(b0));
        const double q = mandel_q(sol.p_alpha);
        le(3, "below-threshold Mandel Q: |Q/1.0 - 1| (Q_expected = A/(C1_eff-A) = 1)",
           std::abs(q - 1.0), 0.05);

        std::vector<double> g2s;
        const double lo = 0.62, hi = 3.0;
        for (int i = 0; i < 20; ++i) {
            const double ratio = lo * std::pow(hi / lo, i / 19.0);
            const DerivedCoeffs c = checks::coeffs_at_ratio(base, ratio);
            const SelfConsistentSolution s = self_consistent_solve(c, suggest_grid(c));
            g2s.push_back(g2_zero(s.p_alpha));
        }
        in_range(3, "g2(0) well below threshold", g2s.front(), 1.9, 2.0);
        in_range(3, "g2(0) well above threshold", g2s.back(), 1.0, 1.1);
        bool mono = true;
        for (std::size_t i = 0; i + 1 < g2s.size(); ++i)
            if (!(g2s[i + 1] < g2s[i])) mono = false;
        record(3, "g2(0) strictly decreasing across 20-point pump sweep", mono ? 1.0 : 0.0, 1.0, "==",
               mono);
    }

    // 4. Beta-mode suppression above threshold, and exact emptiness at C3 = 0.
    void criterion_4_beta_suppression() {
        begin();
        const LaserParams base = checks::fig1_params();
        const DerivedCoeffs c = checks::coeffs_at_ratio(base, 2.0);
        const SelfConsistentSolution sol = self_consistent_solve(c, suggest_grid(c));
        le(4, "beta suppression: nbar_beta/nbar_alpha", sol.nbar_beta / sol.nbar_alpha, 1e-2);

        LaserParams sym = base;  // g1 = g2 and gamma11 = gamma22 make C3 vanish
        sym.g2 = sym.g1;
        sym.gamma22 = sym.gamma11;
        sym.pump_rate = 2.0 * threshold_pump_rate(sym);
        sym = validate_params(sym);
        const DerivedCoeffs cs = derive_coeffs(sym);
        const SelfConsistentSolution ss = self_consistent_solve(cs, suggest_grid(cs));
        record(4, "C3 = 0: p(n_beta = 0)", ss.p_beta.p[0], 1.0, "==", ss.p_beta.p[0] == 1.0);
    }

    // 5. Oracle equivalence on a small-mean scenario: recurrence vs sparse
    // null space, and time integration vs null space.
    void criterion_5_oracle_equivalence() {
        begin();
        LaserParams p = checks::fig1_scaled(0.4, 0.0);  // A_eff/B = 25
        p.pump_rate = 1.2 * threshold_pump_rate(p);
        const DerivedCoeffs c = derive_coeffs(p);
        const FockGrid grid(50, 15);

        const DiagonalState oracle = liouvillian_steady_oracle(c, grid);
        const PhotonDistribution ora = marginal(oracle, Mode::alpha);
        const PhotonDistribution orb = marginal(oracle, Mode::beta);
        const SelfConsistentSolution sol = self_consistent_solve(c, grid);
        le(5, "recurrence vs null-space: TV(alpha marginals)", total_variation(sol.p_alpha, ora),
           0.05);
        le(5, "recurrence vs null-space: TV(beta marginals)", total_variation(sol.p_beta, orb), 0.05);

        // the integration comparison needs the beta cutoff regrown so the
        // absorbing boundary leaks less than the trace tolerance over the run
        const FockGrid grid_dyn(60, 40);
        const DiagonalState oracle_dyn = liouvillian_steady_oracle(c, grid_dyn);
        const GeneratorDiag gen = build_diag_generator(grid_dyn, c);
        const DiagonalState integ = steady_by_integration(gen, c);
        double tv = 0.0;
        for (std::size_t i = 0; i < integ.values.size(); ++i)
            tv += std::abs(integ.values[i] - oracle_dyn.values[i]);
        le(5, "time integration vs null-space: joint TV", 0.5 * tv, 1e-6);
    }

    // 6. Derivation chain: the quadrature-built gain kernel matches the
    // closed-form coefficients, and the vacuum gain rate equals the closed
    // integral r 2g^2/(Gamma^2 + 4g^2).
    void criterion_6_gain_derivation_chain() {
        begin();
        for (double delta : {0.0, 3.0}) {
            LaserParams p = checks::fig1_params(100.0);
            p.delta = delta;
            p = validate_params(p);
            const DerivedCoeffs c = derive_coeffs(p);
            const GainKernel closed = build_gain_kernel_closed(c, 10);
            const GainKernel quad = build_gain_kernel_quadrature(c, 10);
            double worst = 0.0;
            for (int n = 0; n <= 10; ++n)
                for (int m = 0; m <= 10; ++m) {
                    if (n >= 1 && m >= 1)
                        worst = std::max(worst, std::abs(quad.in(n, m) - closed.in(n, m)) /
                                                    std::abs(closed.in(n, m)));
                    worst = std::max(worst, std::abs(quad.self(n, m) - closed.self(n, m)) /
                                                std::abs(closed.self(n, m)));
                }
            le(6, "gain kernel quadrature vs closed form, delta_bar = " + fmt_real(delta), worst,
               1e-6);
        }
        LaserParams p0 = checks::fig1_params(100.0);
        p0.delta = 0.0;
        p0 = validate_params(p0);
        const DerivedCoeffs c0 = derive_coeffs(p0);
        const GainKernel quad0 = build_gain_kernel_quadrature(c0, 2);
        const double gsq = p0.g_squared();
        const double expected = p0.pump_rate * 2.0 * gsq / (1.0 + 4.0 * gsq);
        le(6, "vacuum gain rate vs closed integral", std::abs(quad0.in(1, 1).real() - expected),
           1e-8);
    }

    // 7. Linewidth and frequency from the decay of the (1,0) coherence block,
    // plus the closed-form limit at B = 0, delta = 0.
    void criterion_7_linewidth_and_frequency() {
        begin();
        LaserParams p = checks::fig1_scaled(0.2, 0.0);  // A_eff/B = 50
        p.pump_rate = 3.0 * threshold_pump_rate(p);
        const DerivedCoeffs c = derive_coeffs(p);
        const LinewidthResult res = linewidth_experiment(c, suggest_grid(c));
        le(7, "block decay vs closed form: |2*rate / 2D - 1|",
           std::abs(2.0 * res.fitted_rate / res.linewidth_2D - 1.0), 0.10);
        le(7, "block frequency vs closed form: |freq / (-shift) - 1|",
           std::abs(res.fitted_frequency / (-res.freq_shift) - 1.0), 0.10);

        DerivedCoeffs cl;  // B = 0, delta = 0 limit evaluated at a huge mean
        cl.A = 21.081081081081081;
        cl.C1 = 21.081081081081081;
        cl.C2 = 1.0;
        cl.B = 0.0;
        cl.C3 = 0.0;
        cl.delta_bar = 0.0;
        cl.g = 1e-6;
        const double nbar = 1e12;
        const double lw = linewidth(cl, nbar);
        const double simple = (cl.A + cl.C1) / (4.0 * nbar);
        le(7, "linewidth limit at B/A << 1, delta = 0: |2D/((A+C1)/4nbar) - 1|",
           std::abs(lw / simple - 1.0), 1e-10);
    }

    // 8. Petermann factor: exact unity at gamma12 = 0, strict growth with
    // gamma12, and agreement with the closed form far above threshold.
    void criterion_8_petermann() {
        begin();
        LaserParams base = checks::fig1_params();
        LaserParams top = base;
        top.gamma12 = 16.0;
        const double pump = 2.0 * threshold_pump_rate(top);

        LaserParams closed = base;
        closed.gamma12 = 0.0;
        closed = validate_params(closed);
        const double k0 = petermann(closed, pump, PetermannMode::numeric);
        record(8, "K(gamma12 = 0)", k0, 1.0, "==", k0 == 1.0);

        std::vector<double> ks = {k0};
        for (double g12 : {2.0, 4.0, 8.0, 16.0}) {
            LaserParams p = base;
            p.gamma12 = g12;
            p = validate_params(p);
            ks.push_back(petermann(p, pump, PetermannMode::numeric));
        }
        bool mono = true;
        for (std::size_t i = 0; i + 1 < ks.size(); ++i)
            if (!(ks[i + 1] > ks[i])) mono = false;
        record(8, "K strictly increasing over gamma12 in {0,2,4,8,16}", mono ? 1.0 : 0.0, 1.0, "==",
               mono);

        LaserParams pa = checks::fig1_scaled(1e-3, 0.0, 0.0);  // B/A = 1e-3, delta = 0
        pa.gamma12 = 2.0;
        pa = validate_params(pa);
        LaserParams pa_probe = pa;
        pa_probe.pump_rate = 0.0;
        const double pump10 = 10.0 * threshold_pump_rate(pa_probe);
        const double knum = petermann(pa, pump10, PetermannMode::numeric);
        const double kasy = petermann(pa, pump10, PetermannMode::asymptotic);
        le(8, "numeric vs asymptotic K at B/A = 1e-3, delta = 0: |Knum/Kasy - 1|",
           std::abs(knum / kasy - 1.0), 0.05);
    }

    // 9. Threshold curve: affine and strictly increasing in gamma12; the
    // reference-parameter value to four significant figures.
    void criterion_9_threshold_curve() {
        begin();
        const LaserParams base = checks::fig1_params();
        const double rth = threshold_pump_rate(base);
        le(9, "threshold pump rate vs 14243.96 (4 significant figures)", std::abs(rth - 14243.96),
           5.0);

        const std::vector<double> g12s = {0.0, 4.0, 8.0, 16.0};
        const auto curve = threshold_curve(base, g12s);
        bool inc = true;
        for (std::size_t i = 0; i + 1 < curve.size(); ++i)
            if (!(curve[i + 1].r_th > curve[i].r_th)) inc = false;
        record(9, "threshold strictly increasing in gamma12", inc ? 1.0 : 0.0, 1.0, "==", inc);

        const double s1 = (curve[1].r_th - curve[0].r_th) / (g12s[1] - g12s[0]);
        const double s2 = (curve[2].r_th - curve[1].r_th) / (g12s[2] - g12s[1]);
        const double s3 = (curve[3].r_th - curve[2].r_th) / (g12s[3] - g12s[2]);
        const double dev = std::max(std::abs(s2 / s1 - 1.0), std::abs(s3 / s1 - 1.0));
        le(9, "threshold curve affine in gamma12 (slope deviation)", dev, 1e-9);
    }

    // 10. Structural invariants: trace conservation, positivity, generator
    // column sums, and byte-identical repeated output.
    void criterion_10_structural_invariants() {
        begin();
        LaserParams p = checks::fig1_scaled(0.4, 0.0);
        p.pump_rate = 1.2 * threshold_pump_rate(p);
        const DerivedCoeffs c = derive_coeffs(p);
        const FockGrid grid(60, 40);
        const GeneratorDiag gen = build_diag_generator(grid, c);

        IntegrateControls ctl;
        ctl.t_end = 5.0;
        ctl.n_samples = 50;
        auto [traj, state] = integrate(gen, new_vacuum(grid), ctl);
        double drift = 0.0;
        for (double tr : traj.trace) drift = std::max(drift, std::abs(tr - 1.0));
        le(10, "trace conservation over a dynamics run", drift, 1e-9);

        const DiagonalState steady = steady_by_integration(gen, c);
        le(10, "positivity of converged state: -min entry", -steady.min_entry(), 1e-10);

        double worst_cs = 0.0;
        const auto cs = gen.column_sums();
        for (int a = 0; a < grid.rows() - 1; ++a)
            for (int b = 0; b < grid.cols() - 1; ++b)
                worst_cs = std::max(worst_cs, std::abs(cs[grid.index(a, b)]) );
        const LaserParams pf = checks::fig1_params(2.0 * threshold_pump_rate(checks::fig1_params()));
        const DerivedCoeffs cf = derive_coeffs(pf);
        const FockGrid gridf = suggest_grid(cf);
        const auto csf = build_diag_generator(gridf, cf).column_sums();
        for (int a = 0; a < gridf.rows() - 1; ++a)
            for (int b = 0; b < gridf.cols() - 1; ++b)
                worst_cs = std::max(worst_cs, std::abs(csf[gridf.index(a, b)]));
        le(10, "generator interior column sums", worst_cs, 1e-10);

        // determinism of the CSV output across repeated runs
        namespace fs = std::filesystem;
        const fs::path tmp = fs::temp_directory_path() / "oclaser_validate_determinism";
        fs::remove_all(tmp);
        ScenarioConfig cfg;
        cfg.params = checks::fig1_params(0.5 * threshold_pump_rate(checks::fig1_params()));
        cfg.out_dir = (tmp / "run1").string();
        run_steady(cfg);
        cfg.out_dir = (tmp / "run2").string();
        run_steady(cfg);
        auto slurp = [](const fs::path& f) {
            std::ifstream in(f, std::ios::binary);
            std::ostringstream os;
            os << in.rdbuf();
            return os.str();
        };
        bool same = true;
        for (const char* f : {"report.csv", "dist_alpha.csv", "dist_beta.csv"})
            if (slurp(tmp / "run1" / f) != slurp(tmp / "run2" / f)) same = false;
        fs::remove_all(tmp);
        record(10, "CSV output identical across repeated runs", same ? 1.0 : 0.0, 1.0, "==", same);
    }
};

inline bool run_validation(std::ostream& log, const std::string& csv_path) {
    ValidationSuite suite(log);
    suite.run_all();
    if (!csv_path.empty()) suite.write_csv(csv_path);
    return suite.all_passed();
}

}  // namespace oclaser
