#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "oclaser/config.hpp"
#include "oclaser/csv.hpp"
#include "oclaser/dynamics.hpp"
#include "oclaser/observables.hpp"
#include "oclaser/steady.hpp"

// Scenario execution: steady solves, time evolution, sweeps with a worker
// pool, and the coherence-decay linewidth experiment. All file output goes
// through the CSV/SVG writers (deterministic byte-for-byte for a given
// configuration).

namespace oclaser {

inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {
        "pump_rate", "pump_ratio", "nbar_alpha", "nbar_beta", "mandel_q_alpha", "g2_alpha",
        "linewidth_2D", "freq_shift", "petermann_K", "A", "B", "C1", "C2", "C3", "delta_bar", "g"};
    return cols;
}

inline std::vector<std::string> report_row(const ObservableReport& r) {
    return {fmt_real(r.pump_rate),     fmt_real(r.pump_ratio),  fmt_real(r.nbar_alpha),
            fmt_real(r.nbar_beta),     fmt_real(r.mandel_q_alpha), fmt_real(r.g2_alpha),
            fmt_real(r.linewidth_2D),  fmt_real(r.freq_shift),  fmt_real(r.petermann_K),
            fmt_real(r.coeffs.A),      fmt_real(r.coeffs.B),    fmt_real(r.coeffs.C1),
            fmt_real(r.coeffs.C2),     fmt_real(r.coeffs.C3),   fmt_real(r.coeffs.delta_bar),
            fmt_real(r.coeffs.g)};
}

inline FockGrid grid_for(const ScenarioConfig& cfg, const DerivedCoeffs& coeffs) {
    FockGrid g = suggest_grid(coeffs);
    if (cfg.n_max_alpha) g.n_max_alpha = *cfg.n_max_alpha;
    if (cfg.n_max_beta) g.n_max_beta = *cfg.n_max_beta;
    return FockGrid(g.n_max_alpha, g.n_max_beta);
}

inline void write_distribution(const std::string& path, const PhotonDistribution& d) {
    CsvTable t;
    t.header = {"n", "p"};
    for (std::size_t n = 0; n < d.p.size(); ++n)
        t.add_row({std::to_string(n), fmt_real(d.p[n])});
    t.write(path);
}

inline PhotonDistribution read_distribution(const std::string& path) {
    const CsvTable t = read_csv(path);
    PhotonDistribution d;
    d.p.reserve(t.rows.size());
    for (const auto& row : t.rows) d.p.push_back(std::stod(row.at(1)));
    return d;
}

// Steady solve of one scenario; writes report.csv, dist_alpha.csv and
// dist_beta.csv into the output directory.
inline ObservableReport run_steady(const ScenarioConfig& cfg) {
    const DerivedCoeffs coeffs = derive_coeffs(cfg.params);
    const SelfConsistentSolution sol =
        self_consistent_solve(coeffs, grid_for(cfg, coeffs), cfg.tol_steady, cfg.max_iter);
    const ObservableReport report = make_report(cfg.params, coeffs, sol);

    std::filesystem::create_directories(cfg.out_dir);
    CsvTable t;
    t.header = report_columns();
    t.add_row(report_row(report));
    t.write(cfg.out_dir + "/report.csv");
    write_distribution(cfg.out_dir + "/dist_alpha.csv", sol.p_alpha);
    write_distribution(cfg.out_dir + "/dist_beta.csv", sol.p_beta);
    return report;
}

// Time evolution of the diagonal sector from vacuum; writes trajectory.csv.
inline Trajectory run_evolve(const ScenarioConfig& cfg, double t_end, int n_samples) {
    const DerivedCoeffs coeffs = derive_coeffs(cfg.params);
    const FockGrid grid = grid_for(cfg, coeffs);
    const GeneratorDiag gen = build_diag_generator(grid, coeffs);
    IntegrateControls ctl;
    ctl.rtol = cfg.rtol_integrate;
    ctl.t_end = t_end;
    ctl.n_samples = n_samples;
    auto [traj, final] = integrate(gen, new_vacuum(grid), ctl);

    std::filesystem::create_directories(cfg.out_dir);
    CsvTable t;
    t.header = {"t", "trace", "nbar_alpha", "nbar_beta"};
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        t.add_row({fmt_real(traj.times[i]), fmt_real(traj.trace[i]), fmt_real(traj.nbar_alpha[i]),
                   fmt_real(traj.nbar_beta[i])});
    t.write(cfg.out_dir + "/trajectory.csv");
    return traj;
}

// Coherence-decay experiment on the (1,0) block: seed from the steady state,
// evolve, fit rate and frequency.
struct LinewidthResult {
    double fitted_rate = 0.0;       // decay of |S|, equals D_alpha = half the full linewidth
    double fitted_frequency = 0.0;  // phase advance of S, equals -Im mu(1,0)
    double linewidth_2D = 0.0;      // closed-form full linewidth at the solved mean
    double freq_shift = 0.0;        // closed-form frequency shift
    double nbar_alpha = 0.0;
};

inline LinewidthResult linewidth_experiment(const DerivedCoeffs& coeffs, FockGrid grid,
                                            double rtol = 1e-8) {
    const SelfConsistentSolution sol = self_consistent_solve(coeffs, grid);
    // the seed uses the joint steady state when the null-space oracle can
    // afford it, otherwise the factorized product of the marginals
    DiagonalState joint;
    if (grid.size() <= 200'000) {
        joint = liouvillian_steady_oracle(coeffs, grid);
    } else {
        joint = DiagonalState(grid);
        for (int a = 0; a < grid.rows(); ++a)
            for (int b = 0; b < grid.cols(); ++b) {
                const double pa = a < static_cast<int>(sol.p_alpha.p.size()) ? sol.p_alpha.p[static_cast<std::size_t>(a)] : 0.0;
                const double pb = b < static_cast<int>(sol.p_beta.p.size()) ? sol.p_beta.p[static_cast<std::size_t>(b)] : 0.0;
                joint.at(a, b) = pa * pb;
            }
    }

    const GeneratorCoherence gen = build_coherence_generator(grid, coeffs, 1, 0);
    CoherenceBlock seed(grid, 1, 0);
    for (int a = 0; a + 1 < grid.rows(); ++a)
        for (int b = 0; b < grid.cols(); ++b)
            seed.at(a, b) = std::sqrt(std::max(joint.at(a, b), 0.0) * std::max(joint.at(a + 1, b), 0.0));

    LinewidthResult res;
    res.nbar_alpha = sol.nbar_alpha;
    res.linewidth_2D = linewidth(coeffs, sol.nbar_alpha);
    res.freq_shift = freq_shift(coeffs, sol.nbar_alpha);

    const double rate_guess = 0.5 * res.linewidth_2D;
    const double freq_mag = std::abs(res.freq_shift);
    IntegrateControls ctl;
    ctl.rtol = rtol;
    ctl.t_end = 9.0 / rate_guess;
    int ns = static_cast<int>(std::ceil(ctl.t_end * std::max(freq_mag, 1e-30) / 0.3));
    ctl.n_samples = std::clamp(ns, 400, 20000);
    auto [traj, final] = integrate(gen, seed, ctl);
    const DecayFit fit = fit_decay(traj, 1, 0);
    res.fitted_rate = fit.rate;
    res.fitted_frequency = fit.frequency;
    return res;
}

inline LinewidthResult run_linewidth(const ScenarioConfig& cfg) {
    const DerivedCoeffs coeffs = derive_coeffs(cfg.params);
    const LinewidthResult res = linewidth_experiment(coeffs, grid_for(cfg, coeffs), cfg.rtol_integrate);
    std::filesystem::create_directories(cfg.out_dir);
    CsvTable t;
    t.header = {"fitted_rate", "fitted_frequency", "linewidth_2D", "freq_shift", "nbar_alpha",
                "rate_over_half_2D", "frequency_over_minus_shift"};
    t.add_row({fmt_real(res.fitted_rate), fmt_real(res.fitted_frequency), fmt_real(res.linewidth_2D),
               fmt_real(res.freq_shift), fmt_real(res.nbar_alpha),
               fmt_real(res.fitted_rate / (0.5 * res.linewidth_2D)),
               fmt_real(res.freq_shift != 0.0 ? res.fitted_frequency / -res.freq_shift
                                              : std::nan(""))});
    t.write(cfg.out_dir + "/linewidth.csv");
    return res;
}

// One sweep point: scenario with the swept parameter overridden.
struct SweepRow {
    int index = 0;
    double value = 0.0;
    bool ok = false;
    std::string error;
    ObservableReport report;
};

inline SweepRow sweep_point(const ScenarioConfig& base, const SweepSpec& spec, int i) {
    SweepRow row;
    row.index = i;
    row.value = spec.value_at(i);
    try {
        ScenarioConfig cfg = base;
        if (spec.parameter == "pump_rate")
            cfg.params.pump_rate = row.value;
        else
            cfg.params.gamma12 = row.value;
        cfg.params = validate_params(cfg.params);
        const DerivedCoeffs coeffs = derive_coeffs(cfg.params);
        const SelfConsistentSolution sol =
            self_consistent_solve(coeffs, grid_for(cfg, coeffs), cfg.tol_steady, cfg.max_iter);
        row.report = make_report(cfg.params, coeffs, sol);
        row.ok = true;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        row.error = msg;
    }
    return row;
}

// Sweep over pump_rate or gamma12; rows are ordered by sweep index regardless
// of worker completion order. Returns the number of failed points.
inline int run_sweep(const ScenarioConfig& cfg, const SweepSpec& spec, const std::string& plot_column,
                     int threads) {
    spec.validate();
    const int n = spec.steps;
    std::vector<SweepRow> rows(static_cast<std::size_t>(n));

    const int nw = std::max(1, std::min(threads, n));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            rows[static_cast<std::size_t>(i)] = sweep_point(cfg, spec, i);
        }
    };
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nw));
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::filesystem::create_directories(cfg.out_dir);
    CsvTable t;
    t.header = {"index", spec.parameter, "status", "error"};
    for (const auto& c : report_columns()) t.header.push_back(c);
    const double nan = std::nan("");
    int failed = 0;
    for (const auto& row : rows) {
        std::vector<std::string> cells = {std::to_string(row.index), fmt_real(row.value),
                                          row.ok ? "ok" : "failed", row.error};
        if (row.ok) {
            const auto rep = report_row(row.report);
            cells.insert(cells.end(), rep.begin(), rep.end());
        } else {
            ++failed;
            for (std::size_t i = 0; i < report_columns().size(); ++i) cells.push_back(fmt_real(nan));
        }
        t.add_row(cells);
    }
    t.write(cfg.out_dir + "/sweep.csv");

    // plot the requested report column against the swept parameter
    std::size_t col = 0;
    bool found = false;
    for (std::size_t i = 0; i < report_columns().size(); ++i)
        if (report_columns()[i] == plot_column) {
            col = i;
            found = true;
            break;
        }
    if (!found) throw validation_error("unknown plot column: " + plot_column);
    std::vector<double> xs, ys;
    for (const auto& row : rows) {
        xs.push_back(row.value);
        double y = nan;
        if (row.ok) {
            const auto rep = report_row(row.report);
            y = std::stod(rep[col]);
        }
        ys.push_back(y);
    }
    write_svg_line_plot(cfg.out_dir + "/sweep.svg", xs, ys, spec.parameter, plot_column,
                        plot_column + " vs " + spec.parameter);
    return failed;
}

}  // namespace oclaser
