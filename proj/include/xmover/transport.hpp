#pragma once

#include <span>

#include "xmover/vecspace.hpp"

namespace xmover {

// C(i, j) = Euclidean distance between gram i of `a` and gram j of `b`.
using CostMatrix = Matrix;

struct TransportPlan {
  Matrix flows;  // rows follow the source marginal, columns the target marginal
  double objective = 0.0;
};

CostMatrix cost_matrix(const NgramSequence& a, const NgramSequence& b);

// Column-wise variant for raw point clouds (d x m and d x k).
CostMatrix cost_matrix(const Matrix& a, const Matrix& b);

// Exact solution of the balanced transportation problem
//   min sum C_ij F_ij  s.t.  F 1 = source,  F^T 1 = target,  F >= 0
// by the transportation simplex method (MODI potentials on a spanning-tree
// basis). Zero-mass rows and columns are solved around and come back as
// zero flows. The marginals must be non-negative and their totals may differ
// by at most 1e-6.
TransportPlan solve_wmd(const CostMatrix& cost, std::span<const double> source, std::span<const double> target);

// Word Mover's Distance between two weighted n-gram sequences.
double wmd(const NgramSequence& a, const NgramSequence& b);

}  // namespace xmover
