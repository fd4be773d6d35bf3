#pragma once

#include "xmover/vecspace.hpp"

namespace xmover {

struct Svd {
  Matrix u;
  Vector singular_values;  // non-negative, descending
  Matrix v;
  int sweeps = 0;
};

struct JacobiOptions {
  double tolerance = 1e-12;
  int max_sweeps = 60;
};

// One-sided (Hestenes) Jacobi SVD of a square matrix: M = U diag(S) V^T with
// U and V orthogonal. Throws Error when the sweeps do not converge.
Svd svd_square(const Matrix& m, const JacobiOptions& options = {});

struct PowerIterationOptions {
  double tolerance = 1e-13;
  int max_iterations = 20000;
};

// Unit eigenvector of the dominant eigenvalue of a symmetric PSD matrix,
// sign-normalized so that its largest-magnitude component is positive.
Vector dominant_eigenvector(const Matrix& symmetric, const PowerIterationOptions& options = {});

// Dominant right singular vector of Q (n x d), via power iteration on Q^T Q.
Vector dominant_right_singular_vector(const Matrix& q, const PowerIterationOptions& options = {});

// Flip the sign of `v` so that its largest-magnitude component is positive.
void fix_sign(Vector& v);

}  // namespace xmover
