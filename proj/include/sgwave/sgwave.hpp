#pragma once

// Stochastic-Galerkin LDG solver for the 2D second-order wave equation
// with a random wave speed: orthonormal gPC basis over the random
// variables, energy-conserving local DG in space with alternating
// fluxes, leap-frog in time.

#include "sgwave/config.hpp"
#include "sgwave/coefficient.hpp"
#include "sgwave/dg_basis.hpp"
#include "sgwave/diagnostics.hpp"
#include "sgwave/fields.hpp"
#include "sgwave/gpc.hpp"
#include "sgwave/ldg.hpp"
#include "sgwave/leapfrog.hpp"
#include "sgwave/legendre.hpp"
#include "sgwave/mesh.hpp"
#include "sgwave/multi_index.hpp"
#include "sgwave/presets.hpp"
#include "sgwave/projections.hpp"
#include "sgwave/quadrature.hpp"
#include "sgwave/runner.hpp"
