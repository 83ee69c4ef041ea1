#pragma once

#include "gmrf/chain.hpp"
#include "gmrf/cholesky.hpp"
#include "gmrf/chromatic_pool.hpp"
#include "gmrf/dense_moments.hpp"
#include "gmrf/diagnostics.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/field.hpp"
#include "gmrf/graph.hpp"
#include "gmrf/io.hpp"
#include "gmrf/models.hpp"
#include "gmrf/ordering.hpp"
#include "gmrf/polya_gamma.hpp"
#include "gmrf/rng.hpp"
#include "gmrf/sparse_matrix.hpp"
