#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oclaser/config.hpp"
#include "oclaser/runner.hpp"

using namespace oclaser;
namespace fs = std::filesystem;

namespace {

std::string fig1_config(const std::string& pump_line) {
    return "# two-mode scenario\n"
           "g1 = 0.05\n"
           "g2 = 0.07\n"
           "delta = 3\n"
           "gamma11 = 6\n"
           "gamma22 = 5\n"
           "gamma12 = 5.5\n" +
           pump_line + "\n";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing accepts the flat key = value format") {
    const ScenarioConfig cfg = parse_config_text(fig1_config("pump_rate = 100"));
    REQUIRE(cfg.params.g1 == 0.05);
    REQUIRE(cfg.params.pump_rate == 100.0);
    REQUIRE_FALSE(cfg.pump_ratio.has_value());
}

TEST_CASE("config parsing rejects unknown keys") {
    try {
        parse_config_text(fig1_config("pump_rate = 100") + "gamma21 = 5.5\n");
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        REQUIRE(std::string(e.what()).find("unknown key") != std::string::npos);
        REQUIRE(std::string(e.what()).find("gamma21") != std::string::npos);
    }
}

TEST_CASE("config parsing requires exactly one pump specification") {
    REQUIRE_THROWS_AS(parse_config_text(fig1_config("pump_rate = 1\npump_ratio = 2")),
                      validation_error);
    REQUIRE_THROWS_AS(parse_config_text(fig1_config("delta = 3")), validation_error);
}

TEST_CASE("config parsing rejects bad solver controls") {
    REQUIRE_THROWS_AS(parse_config_text(fig1_config("pump_rate = 1\ntol_steady = -1")),
                      validation_error);
    REQUIRE_THROWS_AS(parse_config_text(fig1_config("pump_rate = abc")), validation_error);
}

TEST_CASE("pump_ratio resolves against the configuration threshold") {
    const ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 2"));
    LaserParams probe = cfg.params;
    probe.pump_rate = 0.0;
    REQUIRE(cfg.params.pump_rate ==
            Catch::Approx(2.0 * threshold_pump_rate(probe)).epsilon(1e-12));
}

TEST_CASE("run_steady writes the report and distributions; zero pump gives vacuum") {
    TempDir tmp("oclaser_test_steady");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_rate = 0"));
    cfg.out_dir = tmp.path.string();
    run_steady(cfg);
    REQUIRE(fs::exists(tmp.path / "report.csv"));
    const PhotonDistribution pa = read_distribution((tmp.path / "dist_alpha.csv").string());
    REQUIRE(pa.p[0] == 1.0);
    const CsvTable rep = read_csv((tmp.path / "report.csv").string());
    REQUIRE(rep.header == report_columns());
    REQUIRE(rep.rows.size() == 1);
}

TEST_CASE("CSV round-trip preserves distribution moments") {
    TempDir tmp("oclaser_test_roundtrip");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 0.5"));
    cfg.out_dir = tmp.path.string();
    run_steady(cfg);
    const DerivedCoeffs c = derive_coeffs(cfg.params);
    const SelfConsistentSolution sol = self_consistent_solve(c, grid_for(cfg, c));
    const PhotonDistribution back = read_distribution((tmp.path / "dist_alpha.csv").string());
    REQUIRE(std::abs(moments(back).mean - moments(sol.p_alpha).mean) <= 1e-12);
    REQUIRE(std::abs(moments(back).second_moment - moments(sol.p_alpha).second_moment) <= 1e-12);
}

TEST_CASE("repeated runs produce byte-identical output") {
    TempDir tmp("oclaser_test_determinism");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 0.5"));
    cfg.out_dir = (tmp.path / "a").string();
    run_steady(cfg);
    cfg.out_dir = (tmp.path / "b").string();
    run_steady(cfg);
    for (const char* f : {"report.csv", "dist_alpha.csv", "dist_beta.csv"})
        REQUIRE(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
}

TEST_CASE("two-point sweep produces two ordered rows and a plot") {
    TempDir tmp("oclaser_test_sweep");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 0.5"));
    cfg.out_dir = tmp.path.string();
    SweepSpec spec;
    spec.parameter = "pump_rate";
    spec.from = 0.5 * threshold_pump_rate(cfg.params);
    spec.to = 2.0 * threshold_pump_rate(cfg.params);
    spec.steps = 2;
    const int failed = run_sweep(cfg, spec, "nbar_alpha", 2);
    REQUIRE(failed == 0);
    const CsvTable t = read_csv((tmp.path / "sweep.csv").string());
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.rows[0][0] == "0");
    REQUIRE(t.rows[1][0] == "1");
    REQUIRE(t.rows[0][2] == "ok");
    REQUIRE(std::stod(t.rows[1][4]) > std::stod(t.rows[0][4]));  // nbar grows with pump
    REQUIRE(fs::exists(tmp.path / "sweep.svg"));
    REQUIRE(slurp(tmp.path / "sweep.svg").find("<svg") == 0);
}

TEST_CASE("sweep marks failed points and continues") {
    TempDir tmp("oclaser_test_sweep_fail");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 0.5"));
    cfg.out_dir = tmp.path.string();
    SweepSpec spec;
    spec.parameter = "gamma12";
    spec.from = 5.5;
    spec.to = 16.0;  // C2 < 0 there: the beta recurrence rejects the regime
    spec.steps = 2;
    const int failed = run_sweep(cfg, spec, "nbar_alpha", 1);
    REQUIRE(failed == 1);
    const CsvTable t = read_csv((tmp.path / "sweep.csv").string());
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.rows[0][2] == "ok");
    REQUIRE(t.rows[1][2] == "failed");
    REQUIRE_FALSE(t.rows[1][3].empty());
}

TEST_CASE("run_evolve writes a conserving trajectory") {
    TempDir tmp("oclaser_test_evolve");
    ScenarioConfig cfg = parse_config_text(fig1_config("pump_ratio = 0.5") + "n_max_alpha = 40\n");
    cfg.out_dir = tmp.path.string();
    const Trajectory traj = run_evolve(cfg, 1.0, 20);
    REQUIRE(traj.times.size() == 21);
    for (double tr : traj.trace) REQUIRE(std::abs(tr - 1.0) <= 1e-9);
    const CsvTable t = read_csv((tmp.path / "trajectory.csv").string());
    REQUIRE(t.header == std::vector<std::string>{"t", "trace", "nbar_alpha", "nbar_beta"});
    REQUIRE(t.rows.size() == 21);
    // photon number grows from vacuum under pumping
    REQUIRE(std::stod(t.rows.back()[2]) > 0.0);
}

TEST_CASE("sweep spec validation") {
    SweepSpec s;
    s.parameter = "delta";
    s.from = 0;
    s.to = 1;
    REQUIRE_THROWS_AS(s.validate(), validation_error);
    s.parameter = "pump_rate";
    s.from = 2;
    s.to = 1;
    REQUIRE_THROWS_AS(s.validate(), validation_error);
    s.from = 0.0;
    s.to = 1.0;
    s.log_scale = true;
    REQUIRE_THROWS_AS(s.validate(), validation_error);
}
