#pragma once

#include "subopt/cg.hpp"
#include "subopt/ellipsoid.hpp"
#include "subopt/gd_baseline.hpp"
#include "subopt/oracle.hpp"
#include "subopt/problem.hpp"
#include "subopt/sesop.hpp"
#include "subopt/subsolver.hpp"
#include "subopt/subspace.hpp"
#include "subopt/trace.hpp"
#include "subopt/types.hpp"
