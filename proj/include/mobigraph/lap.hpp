#pragma once

#include <Eigen/Dense>

#include "mobigraph/graph.hpp"

namespace mobigraph {

struct Assignment {
  Permutation permutation;  // row i is assigned column permutation[i]
  double total_cost = 0.0;
};

// Exact minimum-cost perfect assignment on a square matrix
// (shortest augmenting path with dual potentials, O(n^3)).
// Throws DataError on non-square input or non-finite entries.
Assignment solve_lap(const Eigen::MatrixXd& cost);

}  // namespace mobigraph
