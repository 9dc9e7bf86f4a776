#pragma once

// Umbrella header for the two-mode open-cavity laser simulator.

#include "oclaser/config.hpp"
#include "oclaser/csv.hpp"
#include "oclaser/dynamics.hpp"
#include "oclaser/errors.hpp"
#include "oclaser/fock.hpp"
#include "oclaser/kfactor.hpp"
#include "oclaser/observables.hpp"
#include "oclaser/params.hpp"
#include "oclaser/quadrature.hpp"
#include "oclaser/runner.hpp"
#include "oclaser/steady.hpp"
#include "oclaser/superop.hpp"
#include "oclaser/validate.hpp"
