#pragma once

#include "minor_dyson/io/csv.hpp"
#include "minor_dyson/io/frame.hpp"
#include "minor_dyson/io/json.hpp"
