#pragma once

#include "minor_dyson/densities/adjoint.hpp"
#include "minor_dyson/densities/constants.hpp"
#include "minor_dyson/densities/group_integrals.hpp"
#include "minor_dyson/densities/hciz.hpp"
#include "minor_dyson/densities/invariant.hpp"
#include "minor_dyson/densities/quadrature.hpp"
