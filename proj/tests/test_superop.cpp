#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "oclaser/superop.hpp"

using namespace oclaser;

namespace {

LaserParams fig1(double r = 0.0, double delta = 3.0) {
    LaserParams p;
    p.g1 = 0.05;
    p.g2 = 0.07;
    p.delta = delta;
    p.gamma11 = 6.0;
    p.gamma22 = 5.0;
    p.gamma12 = 5.5;
    p.pump_rate = r;
    return validate_params(p);
}

}  // namespace

TEST_CASE("kick on vacuum follows the two-level exchange") {
    const LaserParams p = fig1(0.0, 0.0);
    const double g = p.g_total();
    TwoModeState vac(FockGrid(6, 2));
    vac.diag.at(0, 0) = 1.0;

    // full transfer at tau = pi/(2g)
    TwoModeState full = lambda_kick(vac, M_PI / (2.0 * g), p);
    REQUIRE(full.diag.at(1, 0) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(std::abs(full.diag.at(0, 0)) < 1e-12);

    // generic tau: sin^2 / cos^2 split
    const double tau = 0.37 / g;
    TwoModeState part = lambda_kick(vac, tau, p);
    REQUIRE(part.diag.at(1, 0) == Catch::Approx(std::sin(g * tau) * std::sin(g * tau)).epsilon(1e-12));
    REQUIRE(part.diag.at(0, 0) == Catch::Approx(std::cos(g * tau) * std::cos(g * tau)).epsilon(1e-12));
}

TEST_CASE("kick preserves trace for random states and interaction times") {
    const LaserParams p = fig1();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        TwoModeState s(FockGrid(12, 3));
        for (int a = 0; a <= 9; ++a)  // keep the top levels empty
            for (int b = 0; b <= 3; ++b) s.diag.at(a, b) = u(rng);
        s.diag.normalize();
        const double tau = 10.0 * u(rng);
        const TwoModeState out = lambda_kick(s, tau, p);
        REQUIRE(std::abs(out.diag.trace() - 1.0) < 1e-12);
    }
}

TEST_CASE("kick acts on coherence blocks with the two-level coefficients") {
    const LaserParams p = fig1(0.0, 0.0);
    const double g = p.g_total();
    const FockGrid grid(6, 2);
    TwoModeState s(grid);
    s.diag.at(0, 0) = 0.5;
    s.diag.at(1, 0) = 0.5;
    s.blocks.emplace_back(grid, 1, 0);
    s.blocks[0].at(0, 0) = {0.5, 0.0};

    const double tau = 0.29 / g;
    const TwoModeState out = lambda_kick(s, tau, p);
    // at delta = 0: Phi_-(n) = cos(phi_n tau) with phi_n = g sqrt(n+1), and
    // the block entry (0,0) has no lowered-index source
    const double expected = std::cos(g * tau) * std::cos(g * std::sqrt(2.0) * tau) * 0.5;
    REQUIRE(out.blocks[0].at(0, 0).real() == Catch::Approx(expected).epsilon(1e-12));
    REQUIRE(std::abs(out.blocks[0].at(0, 0).imag()) < 1e-15);
    // the raised entry picks up the exchange term g^2 sqrt(1*2) s(0) s(1) rho_{0,0}
    const double s0 = std::sin(g * tau) / g;
    const double s1 = std::sin(g * std::sqrt(2.0) * tau) / (g * std::sqrt(2.0));
    const double raised = std::cos(g * std::sqrt(2.0) * tau) * std::cos(g * std::sqrt(3.0) * tau) * 0.0 +
                          g * g * std::sqrt(2.0) * s0 * s1 * 0.5;
    REQUIRE(out.blocks[0].at(1, 0).real() == Catch::Approx(raised).epsilon(1e-12));
    REQUIRE(std::abs(out.diag.trace() - 1.0) < 1e-12);
}

TEST_CASE("kick rejects states touching the cutoff") {
    const LaserParams p = fig1();
    TwoModeState s(FockGrid(4, 2));
    s.diag.at(4, 0) = 1.0;
    REQUIRE_THROWS_AS(lambda_kick(s, 0.1, p), solver_error);
}

TEST_CASE("gain kernel closed form matches the quadrature route") {
    for (double delta : {0.0, 3.0}) {
        const LaserParams p = fig1(100.0, delta);
        const DerivedCoeffs c = derive_coeffs(p);
        const GainKernel closed = build_gain_kernel_closed(c, 10);
        const GainKernel quad = build_gain_kernel_quadrature(c, 10);
        REQUIRE(closed.provenance == GainProvenance::closed_form);
        REQUIRE(quad.provenance == GainProvenance::quadrature);
        for (int n = 0; n <= 10; ++n)
            for (int m = 0; m <= 10; ++m) {
                if (n >= 1 && m >= 1) {
                    const double rel =
                        std::abs(quad.in(n, m) - closed.in(n, m)) / std::abs(closed.in(n, m));
                    REQUIRE(rel < 1e-6);
                }
                const double rels =
                    std::abs(quad.self(n, m) - closed.self(n, m)) / std::abs(closed.self(n, m));
                REQUIRE(rels < 1e-6);
            }
    }
}

TEST_CASE("gain on vacuum: closed integral and master-equation coefficient") {
    const LaserParams p = fig1(100.0, 0.0);
    const DerivedCoeffs c = derive_coeffs(p);
    TwoModeState vac(FockGrid(6, 2));
    vac.diag.at(0, 0) = 1.0;
    const TwoModeState d = gain_quadrature(vac, c);

    const double gsq = p.g_squared();
    const double expected = p.pump_rate * 2.0 * gsq / (1.0 + 4.0 * gsq);
    REQUIRE(std::abs(d.diag.at(1, 0) - expected) < 1e-8);
    // same number through the A, B coefficients
    REQUIRE(expected == Catch::Approx(c.A / (1.0 + c.B_over_A())).epsilon(1e-12));

    DerivedCoeffs zero = c;
    zero.A = 0.0;
    zero.B = 0.0;
    const TwoModeState dz = gain_quadrature(vac, zero);
    for (double v : dz.diag.values) REQUIRE(v == 0.0);
}

TEST_CASE("bare loss: single-mode decay and vacuum stationarity") {
    LaserParams p = fig1();
    p.gamma12 = 0.0;
    p = validate_params(p);
    BareDensityMatrix s(2, 2);
    s.rho(s.index(1, 0), s.index(1, 0)) = 1.0;
    const BareDensityMatrix d = loss_apply_bare(s, p);
    REQUIRE(d.rho(s.index(1, 0), s.index(1, 0)).real() ==
            Catch::Approx(-2.0 * p.gamma11).epsilon(1e-13));

    BareDensityMatrix vac(2, 2);
    vac.rho(0, 0) = 1.0;
    const BareDensityMatrix dv = loss_apply_bare(vac, p);
    REQUIRE(dv.rho.cwiseAbs().maxCoeff() < 1e-15);
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

TEST_CASE("bare loss matches a dense vectorized super-operator") {
    // independent oracle: build the 16x16 super-operator matrix on a
    // two-level-per-mode space with column-stacking vec(A rho B) = (B^T x A)
    const LaserParams p = fig1();
    BareDensityMatrix proto(1, 1);
    const int d = proto.dim();
    Eigen::MatrixXcd a1 = Eigen::MatrixXcd::Zero(d, d), a2 = Eigen::MatrixXcd::Zero(d, d);
    a1(proto.index(0, 0), proto.index(1, 0)) = 1.0;
    a1(proto.index(0, 1), proto.index(1, 1)) = 1.0;
    a2(proto.index(0, 0), proto.index(0, 1)) = 1.0;
    a2(proto.index(1, 0), proto.index(1, 1)) = 1.0;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

    auto lind = [&](const Eigen::MatrixXcd& al, const Eigen::MatrixXcd& alp) -> Eigen::MatrixXcd {
        const Eigen::MatrixXcd ald = al.adjoint();
        return 2.0 * kron(ald.transpose(), alp) - kron((ald * alp).transpose(), id) -
               kron(id, ald * alp);
    };
    const Eigen::MatrixXcd L = p.gamma11 * lind(a1, a1) + p.gamma12 * lind(a1, a2) +
                               p.gamma12 * lind(a2, a1) + p.gamma22 * lind(a2, a2);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd rho(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) rho(i, j) = std::complex<double>(u(rng), u(rng));
    rho = (rho + Eigen::MatrixXcd(rho.adjoint())).eval();  // hermitian test state

    BareDensityMatrix s(1, 1);
    s.rho = rho;
    const BareDensityMatrix out = loss_apply_bare(s, p);

    Eigen::VectorXcd v(d * d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) v(j * d + i) = rho(i, j);
    const Eigen::VectorXcd w = L * v;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            REQUIRE(std::abs(out.rho(i, j) - w(j * d + i)) < 1e-12);

    // cross-coherence example: |1,0><0,1| populates cross terms
    BareDensityMatrix coh(1, 1);
    coh.rho(coh.index(1, 0), coh.index(0, 1)) = 1.0;
    const BareDensityMatrix dcoh = loss_apply_bare(coh, p);
    REQUIRE(std::abs(dcoh.rho(coh.index(0, 0), coh.index(0, 0))) > 0.0);  // gamma12 transfer
}

TEST_CASE("bare loss conserves trace") {
    const LaserParams p = fig1();
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    BareDensityMatrix s(3, 3);
    for (int n1 = 0; n1 <= 2; ++n1)  // interior: top levels empty
        for (int n2 = 0; n2 <= 2; ++n2)
            s.rho(s.index(n1, n2), s.index(n1, n2)) = u(rng);
    s.rho /= s.rho.trace();
    const BareDensityMatrix d = loss_apply_bare(s, p);
    REQUIRE(std::abs(d.rho.trace()) < 1e-12);
}

TEST_CASE("loss rotation to the composite basis") {
    const LaserParams p = fig1();
    const DerivedCoeffs c = derive_coeffs(p);
    const CompositeDamping cd = rotate_loss_to_composite(p);
    REQUIRE(2.0 * cd.c_aa == Catch::Approx(c.C1).epsilon(1e-13));
    REQUIRE(2.0 * cd.c_bb == Catch::Approx(c.C2).epsilon(1e-13));

    // oracle (direct arithmetic on O gamma O^T): 2 c_ab = 2*(167/74) = 167/37,
    // which differs from the printed C3 = 299/74; the gap is reported, not raised
    REQUIRE(2.0 * cd.c_ab == Catch::Approx(167.0 / 37.0).epsilon(1e-13));
    REQUIRE(c.C3 == Catch::Approx(299.0 / 74.0).epsilon(1e-13));
    REQUIRE(std::abs(2.0 * cd.c_ab - c.C3) > 0.1);

    LaserParams iso;
    iso.g1 = 0.04;
    iso.g2 = 0.09;
    iso.gamma11 = iso.gamma22 = 2.0;
    iso.gamma12 = 0.0;
    const CompositeDamping ci = rotate_loss_to_composite(validate_params(iso));
    REQUIRE(std::abs(ci.c_ab) < 1e-14);
}
