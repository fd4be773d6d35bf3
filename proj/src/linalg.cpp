#include "xmover/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xmover/error.hpp"

namespace xmover {

namespace {

// Completes the columns of `u` flagged in `missing` to an orthonormal basis,
// using Gram-Schmidt against the standard basis vectors.
void complete_basis(Matrix& u, std::vector<bool> missing) {
  const Eigen::Index n = u.rows();
  Eigen::Index candidate = 0;
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    if (!missing[static_cast<std::size_t>(c)]) continue;
    while (candidate < n) {
      Vector e = Vector::Unit(n, candidate++);
      // Two passes of Gram-Schmidt for numerical orthogonality.
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
          if (j == c || missing[static_cast<std::size_t>(j)]) continue;
          e -= u.col(j).dot(e) * u.col(j);
        }
      }
      const double norm = e.norm();
      if (norm > 1e-6) {
        u.col(c) = e / norm;
        break;
      }
    }
    missing[static_cast<std::size_t>(c)] = false;
  }
}

}  // namespace

Svd svd_square(const Matrix& m, const JacobiOptions& options) {
  if (m.rows() != m.cols()) throw InvalidArgument("svd_square: matrix must be square");
  if (!m.allFinite()) throw InvalidArgument("svd_square: non-finite entry");
  const Eigen::Index n = m.rows();

  Matrix a = m;
  Matrix v = Matrix::Identity(n, n);
  int sweep = 0;
  bool converged = n <= 1;
  while (!converged) {
    if (sweep == options.max_sweeps) {
      throw Error("svd_square: no convergence after " + std::to_string(options.max_sweeps) + " sweeps");
    }
    ++sweep;
    converged = true;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= options.tolerance * std::sqrt(alpha * beta)) continue;
        converged = false;
        // Rotation that zeroes the (p, q) entry of A^T A.
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }

  Vector sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = a.col(j).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return sigma(x) > sigma(y); });

  Svd out;
  out.sweeps = sweep;
  out.u = Matrix::Zero(n, n);
  out.v = Matrix::Zero(n, n);
  out.singular_values = Vector::Zero(n);
  const double largest = n > 0 ? sigma(order[0]) : 0.0;
  std::vector<bool> missing(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.singular_values(k) = sigma(j);
    out.v.col(k) = v.col(j);
    if (sigma(j) > largest * 1e-15 && sigma(j) > 0.0) {
      out.u.col(k) = a.col(j) / sigma(j);
    } else {
      missing[static_cast<std::size_t>(k)] = true;
    }
  }
  complete_basis(out.u, missing);
  return out;
}

void fix_sign(Vector& v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0.0) v = -v;
}

Vector dominant_eigenvector(const Matrix& symmetric, const PowerIterationOptions& options) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
    throw InvalidArgument("dominant_eigenvector: matrix must be square and non-empty");
  }
  // Deterministic start: the column of largest norm lies in the range of the
  // matrix, so it is not orthogonal to the dominant eigenvector in general.
  Eigen::Index start = 0;
  symmetric.colwise().norm().maxCoeff(&start);
  Vector x = symmetric.col(start);
  if (!(x.norm() > 0.0)) throw InvalidArgument("dominant_eigenvector: zero matrix");
  x.normalize();

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Vector y = symmetric * x;
    const double norm = y.norm();
    if (!(norm > 0.0)) break;
    y /= norm;
    fix_sign(y);
    const double change = (y - x).norm();
    x = std::move(y);
    if (change <= options.tolerance) return x;
  }

  // Slow convergence means a small eigengap; fall back to the Jacobi
  // decomposition, which is exact for symmetric PSD input.
  Vector top = svd_square(symmetric).v.col(0);
  fix_sign(top);
  return top;
}

Vector dominant_right_singular_vector(const Matrix& q, const PowerIterationOptions& options) {
  return dominant_eigenvector(q.transpose() * q, options);
}

}  // namespace xmover
