#pragma once

#include "minor_dyson/verification/experiments.hpp"
#include "minor_dyson/verification/stats.hpp"
#include "minor_dyson/verification/suites.hpp"
#include "minor_dyson/verification/triple.hpp"
#include "minor_dyson/verification/witness.hpp"
