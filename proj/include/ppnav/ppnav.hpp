#pragma once

#include "analytic.hpp"
#include "csv.hpp"
#include "delaunay.hpp"
#include "edge_oracle.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "model.hpp"
#include "navigators.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "point_process.hpp"
#include "predicates.hpp"
#include "quadrature.hpp"
#include "regeneration.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "small_world.hpp"
#include "spatial_index.hpp"
#include "stats.hpp"
#include "svg.hpp"
#include "tree.hpp"
#include "vec.hpp"
