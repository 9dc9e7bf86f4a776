// Command-line front end for the two-mode open-cavity laser simulator.
//
// Subcommands:
//   steady     solve one scenario, write report.csv + photon distributions
//   evolve     integrate the diagonal master equation from vacuum
//   sweep      solve along a parameter grid, write sweep.csv + sweep.svg
//   linewidth  coherence-decay experiment on the (1,0) block
//   validate   run the full validation suite
//
// Exit codes: 0 success, 1 usage error, 2 solver error, 3 partial sweep
// failure, 4 validation failure.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "oclaser/oclaser.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitPartialSweep = 3;
constexpr int kExitValidation = 4;

oclaser::ScenarioConfig load(const std::string& config_path, const std::string& out_dir) {
    oclaser::ScenarioConfig cfg = oclaser::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    for (const auto& w : cfg.params.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

void print_report(const oclaser::ObservableReport& r) {
    std::cout << "pump_rate     = " << r.pump_rate << " (A/C1_eff = " << r.pump_ratio << ")\n"
              << "nbar_alpha    = " << r.nbar_alpha << "\n"
              << "nbar_beta     = " << r.nbar_beta << "\n"
              << "Mandel Q      = " << r.mandel_q_alpha << "\n"
              << "g2(0)         = " << r.g2_alpha << "\n"
              << "linewidth 2D  = " << r.linewidth_2D << "\n"
              << "freq shift    = " << r.freq_shift << "\n"
              << "Petermann K   = " << r.petermann_K << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-mode open-cavity laser simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::string param = "pump_rate", column = "nbar_alpha", scale = "linear";
    double from = 0.0, to = 0.0, t_end = 10.0;
    int steps = 2, samples = 200;
    int threads = static_cast<int>(std::min(8u, std::max(1u, std::thread::hardware_concurrency())));

    auto* steady = app.add_subcommand("steady", "steady-state solve of one scenario");
    steady->add_option("--config", config_path, "scenario config file")->required();
    steady->add_option("--out", out_dir, "output directory (overrides config)");

    auto* evolve = app.add_subcommand("evolve", "time evolution from vacuum");
    evolve->add_option("--config", config_path, "scenario config file")->required();
    evolve->add_option("--out", out_dir, "output directory (overrides config)");
    evolve->add_option("--t-end", t_end, "integration end time (units of 1/Gamma)");
    evolve->add_option("--samples", samples, "number of recorded samples");

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter");
    sweep->add_option("--config", config_path, "scenario config file")->required();
    sweep->add_option("--out", out_dir, "output directory (overrides config)");
    sweep->add_option("--param", param, "swept parameter: pump_rate | gamma12");
    sweep->add_option("--from", from, "sweep start")->required();
    sweep->add_option("--to", to, "sweep end")->required();
    sweep->add_option("--steps", steps, "number of points (>= 2)");
    sweep->add_option("--scale", scale, "linear | log");
    sweep->add_option("--column", column, "report column for sweep.svg");
    sweep->add_option("--threads", threads, "worker threads");

    auto* lw = app.add_subcommand("linewidth", "coherence-decay linewidth experiment");
    lw->add_option("--config", config_path, "scenario config file")->required();
    lw->add_option("--out", out_dir, "output directory (overrides config)");

    auto* validate = app.add_subcommand("validate", "run the validation suite");
    validate->add_option("--out", out_dir, "output directory for validate.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (steady->parsed()) {
            const auto cfg = load(config_path, out_dir);
            const auto report = oclaser::run_steady(cfg);
            print_report(report);
            std::cout << "wrote " << cfg.out_dir << "/report.csv, dist_alpha.csv, dist_beta.csv\n";
            return kExitOk;
        }
        if (evolve->parsed()) {
            const auto cfg = load(config_path, out_dir);
            oclaser::run_evolve(cfg, t_end, samples);
            std::cout << "wrote " << cfg.out_dir << "/trajectory.csv\n";
            return kExitOk;
        }
        if (sweep->parsed()) {
            const auto cfg = load(config_path, out_dir);
            oclaser::SweepSpec spec;
            spec.parameter = param;
            spec.from = from;
            spec.to = to;
            spec.steps = steps;
            if (scale == "log")
                spec.log_scale = true;
            else if (scale != "linear")
                throw oclaser::validation_error("scale must be linear or log");
            const int failed = oclaser::run_sweep(cfg, spec, column, threads);
            std::cout << "wrote " << cfg.out_dir << "/sweep.csv and sweep.svg (" << failed
                      << " failed points)\n";
            return failed == 0 ? kExitOk : kExitPartialSweep;
        }
        if (lw->parsed()) {
            const auto cfg = load(config_path, out_dir);
            const auto res = oclaser::run_linewidth(cfg);
            std::cout << "fitted rate      = " << res.fitted_rate << "\n"
                      << "fitted frequency = " << res.fitted_frequency << "\n"
                      << "closed-form 2D   = " << res.linewidth_2D << "\n"
                      << "closed-form shift= " << res.freq_shift << "\n"
                      << "nbar_alpha       = " << res.nbar_alpha << "\n"
                      << "wrote " << cfg.out_dir << "/linewidth.csv\n";
            return kExitOk;
        }
        if (validate->parsed()) {
            const std::string dir = out_dir.empty() ? "." : out_dir;
            std::filesystem::create_directories(dir);
            const bool ok = oclaser::run_validation(std::cout, dir + "/validate.csv");
            std::cout << (ok ? "validation suite: all checks passed\n"
                             : "validation suite: FAILURES present\n");
            return ok ? kExitOk : kExitValidation;
        }
    } catch (const oclaser::validation_error& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const oclaser::solver_error& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
