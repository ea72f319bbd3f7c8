#pragma once

// Umbrella header for the library. The CLI layer (ngt/cli.hpp) is separate
// because it pulls in the vendored CLI11 and JSON headers.

#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/linalg.hpp"
#include "ngt/operators.hpp"
#include "ngt/quadrature.hpp"
#include "ngt/transform.hpp"
#include "ngt/domain.hpp"
#include "ngt/solver.hpp"
#include "ngt/verify.hpp"
#include "ngt/analysis.hpp"
#include "ngt/io.hpp"
