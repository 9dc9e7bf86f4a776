#pragma once

#include <stdexcept>
#include <string>

namespace oclaser {

// Invalid physical parameters, config keys or call preconditions.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure inside a solver (non-convergence, degenerate regime,
// grid too small, quadrature instability, ...).
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid-size failure that callers may recover from by enlarging the grid.
// `mode` tells which cutoff was hit: 'a' (alpha), 'b' (beta).
class grid_error : public solver_error {
public:
    grid_error(const std::string& msg, char mode) : solver_error(msg), mode_(mode) {}
    char mode() const { return mode_; }

private:
    char mode_;
};

}  // namespace oclaser
