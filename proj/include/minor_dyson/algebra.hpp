#pragma once

#include "minor_dyson/algebra/element.hpp"
#include "minor_dyson/algebra/ensemble.hpp"
#include "minor_dyson/algebra/jacobi.hpp"
#include "minor_dyson/algebra/matrix.hpp"
#include "minor_dyson/algebra/pfaffian.hpp"
#include "minor_dyson/algebra/spectral.hpp"
