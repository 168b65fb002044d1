#pragma once

// Umbrella header: sparse PageRank solvers (power, inner-outer splittings,
// restarted Krylov methods, and splitting/Krylov hybrids) plus the dense
// reference path, synthetic graph generation, and the benchmark harness.

#include "prsolve/bench.hpp"
#include "prsolve/dense_kernels.hpp"
#include "prsolve/hybrid.hpp"
#include "prsolve/krylov.hpp"
#include "prsolve/matrix_market.hpp"
#include "prsolve/report.hpp"
#include "prsolve/sparse_matrix.hpp"
#include "prsolve/splitting.hpp"
#include "prsolve/synthetic.hpp"
#include "prsolve/transition.hpp"
#include "prsolve/types.hpp"
