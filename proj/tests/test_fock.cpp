#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oclaser/fock.hpp"
#include "oclaser/params.hpp"

using namespace oclaser;

TEST_CASE("vacuum state") {
    const DiagonalState s = new_vacuum(FockGrid(5, 5));
    REQUIRE(s.trace() == 1.0);
    REQUIRE(s.at(0, 0) == 1.0);
    const DiagonalState s2 = new_vacuum(FockGrid(1, 1));
    REQUIRE(s2.values.size() == 4);
    int nonzero = 0;
    for (double v : s2.values)
        if (v != 0.0) ++nonzero;
    REQUIRE(nonzero == 1);
    REQUIRE(moments(marginal(s, Mode::alpha)).mean == 0.0);
    REQUIRE(moments(marginal(s, Mode::beta)).mean == 0.0);
}

TEST_CASE("marginals") {
    const DiagonalState v = new_vacuum(FockGrid(4, 4));
    REQUIRE(marginal(v, Mode::alpha).p[0] == 1.0);

    DiagonalState uniform(FockGrid(1, 1));
    for (double& x : uniform.values) x = 0.25;
    const PhotonDistribution pa = marginal(uniform, Mode::alpha);
    const PhotonDistribution pb = marginal(uniform, Mode::beta);
    REQUIRE(pa.p[0] == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(pa.p[1] == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(pb.p[0] == Catch::Approx(0.5).epsilon(1e-15));

    // product of a geometric alpha distribution with beta vacuum
    DiagonalState prod(FockGrid(40, 3));
    for (int a = 0; a <= 40; ++a) prod.at(a, 0) = 0.5 * std::pow(0.5, a);
    prod.normalize();
    const PhotonDistribution g = marginal(prod, Mode::alpha);
    double norm = 0.0;
    for (int a = 0; a <= 40; ++a) norm += std::pow(0.5, a + 1);
    for (int a = 0; a <= 40; ++a)
        REQUIRE(g.p[static_cast<std::size_t>(a)] ==
                Catch::Approx(std::pow(0.5, a + 1) / norm).margin(1e-15));

    DiagonalState bad(FockGrid(2, 2));
    bad.at(0, 0) = 0.9;  // trace off by more than 1e-6
    REQUIRE_THROWS_AS(marginal(bad, Mode::alpha), solver_error);
}

TEST_CASE("moments against closed forms") {
    // geometric p(n) = 0.5^(n+1): mean 1, second moment 3
    PhotonDistribution geom;
    geom.p.resize(61);
    for (int n = 0; n <= 60; ++n) geom.p[static_cast<std::size_t>(n)] = std::pow(0.5, n + 1);
    geom.normalize();
    const Moments mg = moments(geom);
    REQUIRE(std::abs(mg.mean - 1.0) < 1e-12);
    REQUIRE(std::abs(mg.second_moment - 3.0) < 1e-12);

    // Poisson(4): mean 4, second moment 20
    PhotonDistribution pois;
    pois.p.resize(61);
    for (int n = 0; n <= 60; ++n)
        pois.p[static_cast<std::size_t>(n)] = std::exp(-4.0 + n * std::log(4.0) - std::lgamma(n + 1.0));
    pois.normalize();
    const Moments mp = moments(pois);
    REQUIRE(std::abs(mp.mean - 4.0) < 1e-9);
    REQUIRE(std::abs(mp.second_moment - 20.0) < 1e-9);

    PhotonDistribution delta0;
    delta0.p = {1.0};
    REQUIRE(moments(delta0).mean == 0.0);
    REQUIRE(moments(delta0).second_moment == 0.0);
}

TEST_CASE("marginal moments agree with direct joint sums") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DiagonalState s(FockGrid(6, 5));
    for (double& v : s.values) v = u(rng);
    s.normalize();
    const Moments ma = moments(marginal(s, Mode::alpha));
    double mean = 0.0, m2 = 0.0;
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; b <= 5; ++b) {
            mean += a * s.at(a, b);
            m2 += a * a * s.at(a, b);
        }
    REQUIRE(ma.mean == Catch::Approx(mean).epsilon(1e-12));
    REQUIRE(ma.second_moment == Catch::Approx(m2).epsilon(1e-12));
}

TEST_CASE("grid suggestion policy") {
    LaserParams p;
    p.g1 = 0.05;
    p.g2 = 0.07;
    p.delta = 3.0;
    p.gamma11 = 6.0;
    p.gamma22 = 5.0;
    p.gamma12 = 5.5;
    p = validate_params(p);

    p.pump_rate = 0.5 * threshold_pump_rate(p);
    const FockGrid below = suggest_grid(derive_coeffs(p));
    REQUIRE(below.n_max_alpha == 30);  // clamp at zero mean estimate
    REQUIRE(below.n_max_beta == 15);

    p.pump_rate = 2.0 * threshold_pump_rate(p);
    const FockGrid above = suggest_grid(derive_coeffs(p));
    REQUIRE(above.n_max_alpha == 542);  // mean estimate 337.84 plus ten sigma plus slack
    REQUIRE(above.n_max_beta == 15);
}

TEST_CASE("coherence blocks store canonical offsets and reconstruct hermitian matrices") {
    const FockGrid grid(3, 2);
    REQUIRE_THROWS_AS(CoherenceBlock(grid, -1, 0), validation_error);
    REQUIRE_THROWS_AS(CoherenceBlock(grid, 0, -2), validation_error);

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TwoModeState state(grid);
    for (double& v : state.diag.values) v = u(rng) + 1.5;
    state.blocks.emplace_back(grid, 1, 0);
    state.blocks.emplace_back(grid, 0, 1);
    state.blocks.emplace_back(grid, 2, 1);
    for (auto& blk : state.blocks) {
        for (auto& v : blk.values) v = {u(rng), u(rng)};
        blk.clip_support();
    }

    // rebuild the full matrix: stored blocks above the diagonal, conjugates below
    const int dim = grid.rows() * grid.cols();
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
    for (int a = 0; a < grid.rows(); ++a)
        for (int b = 0; b < grid.cols(); ++b)
            full(static_cast<int>(grid.index(a, b)), static_cast<int>(grid.index(a, b))) =
                state.diag.at(a, b);
    for (const auto& blk : state.blocks)
        for (int a = 0; a < grid.rows(); ++a)
            for (int b = 0; b < grid.cols(); ++b) {
                if (!blk.in_support(a, b)) continue;
                const int r = static_cast<int>(grid.index(a, b));
                const int cidx = static_cast<int>(grid.index(a + blk.k1, b + blk.k2));
                full(r, cidx) = blk.at(a, b);
                full(cidx, r) = std::conj(blk.at(a, b));
            }
    REQUIRE((full - full.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    // entries with partners outside the grid stay zero
    for (const auto& blk : state.blocks)
        for (int a = 0; a < grid.rows(); ++a)
            for (int b = 0; b < grid.cols(); ++b)
                if (!blk.in_support(a, b)) REQUIRE(blk.at(a, b) == std::complex<double>(0.0, 0.0));
}
