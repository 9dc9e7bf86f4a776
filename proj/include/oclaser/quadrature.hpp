#pragma once

#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "oclaser/errors.hpp"

// Gauss-Laguerre rules for integrals of the form
//   int_0^inf e^{-x} f(x) dx ~ sum_i w_i f(x_i),
// computed by the Golub-Welsch eigenvalue method on the Laguerre Jacobi
// matrix (diag 2i+1, off-diag i+1; zeroth moment 1).

namespace oclaser {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule compute_gauss_laguerre(int order) {
    if (order < 1) throw validation_error("quadrature order must be >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 0; i < order; ++i) {
        J(i, i) = 2.0 * i + 1.0;
        if (i + 1 < order) {
            J(i, i + 1) = i + 1.0;
            J(i + 1, i) = i + 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw solver_error("Gauss-Laguerre eigensolve failed");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
    }
    return rule;
}

inline const QuadratureRule& gauss_laguerre(int order) {
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_laguerre(order)).first;
    return it->second;
}

// sin(x)/x with the series branch near zero
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

}  // namespace oclaser
