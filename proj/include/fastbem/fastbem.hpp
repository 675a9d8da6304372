#pragma once

#include "box.hpp"
#include "clustering.hpp"
#include "discretization.hpp"
#include "galerkin.hpp"
#include "gca.hpp"
#include "h2matrix.hpp"
#include "hca.hpp"
#include "hmatrix.hpp"
#include "kernel.hpp"
#include "lowrank.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "study.hpp"
