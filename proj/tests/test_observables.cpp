#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oclaser/observables.hpp"

using namespace oclaser;

namespace {

LaserParams fig1(double r = 0.0) {
    LaserParams p;
    p.g1 = 0.05;
    p.g2 = 0.07;
    p.delta = 3.0;
    p.gamma11 = 6.0;
    p.gamma22 = 5.0;
    p.gamma12 = 5.5;
    p.pump_rate = r;
    return validate_params(p);
}

DerivedCoeffs fig1_at_ratio(double ratio) {
    LaserParams p = fig1();
    p.pump_rate = ratio * threshold_pump_rate(p);
    return derive_coeffs(p);
}

PhotonDistribution poisson(double lambda, int n_max) {
    PhotonDistribution d;
    d.p.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
        d.p[static_cast<std::size_t>(n)] =
            std::exp(-lambda + n * std::log(lambda) - std::lgamma(n + 1.0));
    d.normalize();
    return d;
}

PhotonDistribution geometric(double x, int n_max) {
    PhotonDistribution d;
    d.p.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) d.p[static_cast<std::size_t>(n)] = std::pow(x, n);
    d.normalize();
    return d;
}

}  // namespace

TEST_CASE("Mandel Q calibration") {
    REQUIRE(std::abs(mandel_q(poisson(4.0, 60))) < 1e-9);
    REQUIRE(std::abs(mandel_q(geometric(0.5, 80)) - 1.0) < 1e-9);
    PhotonDistribution vac;
    vac.p = {1.0};
    REQUIRE_THROWS_AS(mandel_q(vac), solver_error);
}

TEST_CASE("Q of a geometric distribution equals its mean") {
    for (double x : {0.2, 0.5, 0.8}) {
        const PhotonDistribution d = geometric(x, 200);
        REQUIRE(std::abs(mandel_q(d) - moments(d).mean) < 1e-9);
    }
}

TEST_CASE("g2(0) limits") {
    REQUIRE(std::abs(g2_zero(geometric(0.5, 80)) - 2.0) < 1e-6);
    REQUIRE(std::abs(g2_zero(poisson(4.0, 60)) - 1.0) < 1e-9);
}

TEST_CASE("below-threshold Q approaches the closed form") {
    DerivedCoeffs c = fig1_at_ratio(0.5);
    c.B = 0.0;
    const SelfConsistentSolution sol = self_consistent_solve(c, suggest_grid(c));
    // A/(C1_eff - A) = 1 at half threshold
    REQUIRE(std::abs(mandel_q(sol.p_alpha) - 1.0) < 0.05);
}

TEST_CASE("far-above-threshold g2 approaches 1 + 1/nbar") {
    const DerivedCoeffs c = fig1_at_ratio(2.0);
    const SelfConsistentSolution sol = self_consistent_solve(c, suggest_grid(c));
    const double expected = 1.0 + 1.0 / 337.8378378378378;
    REQUIRE(std::abs(g2_zero(sol.p_alpha) - expected) < 0.1 * (expected - 1.0));
}

TEST_CASE("weak-pump law") {
    const DerivedCoeffs c = fig1_at_ratio(0.5);
    const PhotonDistribution d = analytic_weak_pump(c, 60);
    REQUIRE(d.p[0] == Catch::Approx(0.5).epsilon(1e-9));
    REQUIRE(moments(d).mean == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(weak_pump_boltzmann_factor(c) == Catch::Approx(0.5).epsilon(1e-12));

    DerivedCoeffs tiny = c;
    tiny.A = 1e-12;
    const PhotonDistribution v = analytic_weak_pump(tiny, 10);
    REQUIRE(v.p[0] == Catch::Approx(1.0).epsilon(1e-10));

    REQUIRE_THROWS_AS(analytic_weak_pump(fig1_at_ratio(1.5), 60), solver_error);
}

TEST_CASE("strong-pump law: mode, mean, and fluctuations") {
    const DerivedCoeffs c = fig1_at_ratio(2.0);
    const PhotonDistribution d = analytic_strong_pump(c, 600);
    // mode where the ratio crosses one
    std::size_t mode = 0;
    for (std::size_t n = 0; n < d.p.size(); ++n)
        if (d.p[n] > d.p[mode]) mode = n;
    const double nstar = analytic_nbar(c);
    REQUIRE(std::abs(static_cast<double>(mode) - nstar) <= 1.0);
    REQUIRE(std::abs(moments(d).mean / 337.8378378378378 - 1.0) < 0.02);
    const double q = mandel_q(d);
    REQUIRE(q >= 0.0);
    // above-threshold closed form C1_eff/(A - C1_eff) = 1 at twice threshold
    REQUIRE(std::abs(q - 1.0) < 0.1);
    REQUIRE(q < moments(d).mean);  // below the thermal value
}

TEST_CASE("analytic mean photon number") {
    const DerivedCoeffs c = fig1_at_ratio(2.0);
    REQUIRE(analytic_nbar(c) == Catch::Approx(337.8378378378378).epsilon(1e-12));
    REQUIRE_THROWS_AS(analytic_nbar(fig1_at_ratio(1.0)), solver_error);

    // doubling g at a fixed pump ratio quarters the mean
    LaserParams p2 = fig1();
    p2.g1 *= 2.0;
    p2.g2 *= 2.0;
    p2 = validate_params(p2);
    p2.pump_rate = 2.0 * threshold_pump_rate(p2);
    REQUIRE(analytic_nbar(derive_coeffs(p2)) ==
            Catch::Approx(337.8378378378378 / 4.0).epsilon(1e-12));
}

TEST_CASE("linewidth limit and monotonicity") {
    DerivedCoeffs c;
    c.A = 21.0;
    c.C1 = 21.0;
    c.B = 0.0;
    c.C2 = 1.0;
    c.delta_bar = 0.0;
    c.g = 1e-6;
    const double nbar = 1e12;
    REQUIRE(std::abs(linewidth(c, nbar) / ((c.A + c.C1) / (4.0 * nbar)) - 1.0) < 1e-10);

    const DerivedCoeffs cf = fig1_at_ratio(2.0);
    REQUIRE(linewidth(cf, 600.0) < linewidth(cf, 300.0));
    REQUIRE_THROWS_AS(linewidth(cf, 0.0), solver_error);
}

TEST_CASE("frequency shift") {
    DerivedCoeffs c = fig1_at_ratio(2.0);
    DerivedCoeffs c0 = c;
    c0.delta_bar = 0.0;
    REQUIRE(freq_shift(c0, 100.0) == 0.0);

    const double nbar = 337.8378378378378;
    const double den = 1.0 + 9.0 + c.B_over_A() * (nbar + 1.5) + c.B_over_4A() * c.B_over_4A();
    REQUIRE(freq_shift(c, nbar) == Catch::Approx(-(c.A * 3.0 / 2.0) / den).epsilon(1e-13));

    for (double db : {-3.0, -0.5, 0.7, 2.0}) {
        DerivedCoeffs cd = c;
        cd.delta_bar = db;
        const double shift = freq_shift(cd, 50.0);
        REQUIRE(shift * db <= 0.0);
        if (db != 0.0) REQUIRE(shift != 0.0);
    }
}

TEST_CASE("Petermann factor: identity, growth, and threshold guard") {
    LaserParams top = fig1();
    top.gamma12 = 16.0;
    const double pump = 2.0 * threshold_pump_rate(top);

    LaserParams closed = fig1();
    closed.gamma12 = 0.0;
    closed = validate_params(closed);
    REQUIRE(petermann(closed, pump, PetermannMode::numeric) == 1.0);
    REQUIRE(petermann(closed, pump, PetermannMode::asymptotic) == 1.0);

    double prev = 0.0;
    for (double g12 : {0.0, 2.0, 4.0, 8.0, 16.0}) {
        LaserParams p = fig1();
        p.gamma12 = g12;
        p = validate_params(p);
        const double k = petermann(p, pump, PetermannMode::numeric);
        REQUIRE(k > prev);
        prev = k;
    }

    REQUIRE_THROWS_AS(petermann(validate_params(fig1()), 0.5 * threshold_pump_rate(fig1()),
                                PetermannMode::numeric),
                      solver_error);
}

TEST_CASE("threshold curve: endpoints, slope, monotonicity") {
    const LaserParams base = fig1();
    const std::vector<double> grid = {0.0, 4.0, 8.0, 16.0};
    const auto curve = threshold_curve(base, grid);
    LaserParams z = base;
    z.gamma12 = 0.0;
    REQUIRE(curve[0].r_th == threshold_pump_rate(validate_params(z)));

    // affine slope: 2 g1 g2 (1 + db^2) / g^4, checked by finite differences
    const double gsq = base.g_squared();
    const double slope = 2.0 * base.g1 * base.g2 * 10.0 / (gsq * gsq);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double fd = (curve[i + 1].r_th - curve[i].r_th) / (grid[i + 1] - grid[i]);
        REQUIRE(fd == Catch::Approx(slope).epsilon(1e-10));
        REQUIRE(curve[i + 1].r_th > curve[i].r_th);
    }
}

TEST_CASE("observable report satisfies the defining identity") {
    LaserParams p = fig1();
    p.pump_rate = 1.5 * threshold_pump_rate(p);
    const DerivedCoeffs c = derive_coeffs(p);
    const SelfConsistentSolution sol = self_consistent_solve(c, suggest_grid(c));
    const ObservableReport r = make_report(p, c, sol);
    REQUIRE(std::abs(r.g2_alpha - (r.mandel_q_alpha / r.nbar_alpha + 1.0)) <= 1e-12);
    REQUIRE(r.pump_ratio == Catch::Approx(1.5).epsilon(1e-12));
    REQUIRE(std::isfinite(r.petermann_K));
    REQUIRE(r.petermann_K > 1.0);
}
