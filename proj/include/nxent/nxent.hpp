#pragma once

#include "nxent/distribution.hpp"
#include "nxent/errors.hpp"
#include "nxent/functionals.hpp"
#include "nxent/problem_io.hpp"
#include "nxent/q_algebra.hpp"
#include "nxent/solvers.hpp"
#include "nxent/triangle.hpp"
