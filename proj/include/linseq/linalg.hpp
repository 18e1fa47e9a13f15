#pragma once

// Reference computations for the nine tasks. Everything here is dense,
// double precision, and sized for n <= 30.

#include <cstddef>
#include <vector>

#include "linseq/matrix.hpp"

namespace linseq {

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
/// a * b. Throws ShapeError.
Matrix matmul(const Matrix& a, const Matrix& b);
/// m * v for a column vector v. Throws ShapeError.
Matrix matvec(const Matrix& m, const Matrix& v);

double trace(const Matrix& m);
/// LU with partial pivoting.
double determinant(const Matrix& m);
double frobenius_norm(const Matrix& m);

struct EigenResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the unit eigenvector of values[i]
};

struct JacobiOptions {
  // Converged once every off-diagonal |a_pq| <= tolerance * ||m||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix: Q M Q^T = diag(values).
/// The first component of each eigenvector with |x| > 1e-12 is positive.
/// Throws NotSymmetric (relative asymmetry above 1e-12) or NoConvergence.
EigenResult sym_eigen(const Matrix& m, const JacobiOptions& opts = {});

/// Same iteration without accumulating eigenvectors.
std::vector<double> sym_eigenvalues(const Matrix& m, const JacobiOptions& opts = {});

/// Square roots of the (clamped) eigenvalues of M^T M, descending; cols(m) values.
std::vector<double> singular_values(const Matrix& m);

struct SvdResult {
  std::vector<double> singular;  // min(m, n) values, descending, >= 0
  Matrix u;                      // m x m orthogonal
  Matrix v;                      // n x n orthogonal
};

/// S = U M V with S diagonal, nonnegative, descending. V comes from the
/// eigenvectors of M^T M, U from M v_i / s_i, completed from M M^T.
SvdResult svd(const Matrix& m);

/// Gauss-Jordan elimination with partial pivoting. Throws Singular when a
/// pivot falls below 1e-12 * max|m_ij|, ShapeError for non-square input.
Matrix invert(const Matrix& m);

/// s_max / s_min; +infinity when s_min == 0.
double condition_number(const Matrix& m);

}  // namespace linseq
