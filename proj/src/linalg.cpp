#include "linseq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "linseq/error.hpp"

namespace linseq {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square() || m.rows() == 0) {
    throw ShapeError(std::string(what) + " needs a non-empty square matrix, got " + m.shape_string());
  }
}

// Symmetrized copy of m as a flat row-major array.
std::vector<double> symmetric_copy(const Matrix& m) {
  require_square(m, "symmetric eigendecomposition");
  const std::size_t n = m.rows();
  const double scale = m.max_abs();
  std::vector<double> a(m.data().begin(), m.data().end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = a[i * n + j];
      const double y = a[j * n + i];
      if (std::fabs(x - y) > 1e-12 * scale) {
        throw NotSymmetric("matrix is not symmetric at (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
      }
      a[i * n + j] = a[j * n + i] = 0.5 * (x + y);
    }
  }
  return a;
}

// Cyclic Jacobi on the symmetric n x n array `a`. Accumulates rotations into
// the columns of `v` when given.
void jacobi(std::vector<double>& a, std::size_t n, std::vector<double>* v,
            const JacobiOptions& opts) {
  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double threshold = opts.tolerance * fro;
  if (fro == 0.0) return;

  for (int sweep = 0;; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a[p * n + q]));
    }
    if (off <= threshold) return;
    if (sweep >= opts.max_sweeps) {
      throw NoConvergence("Jacobi did not converge after " + std::to_string(opts.max_sweeps) +
                          " sweeps (off-diagonal " + std::to_string(off) + ")");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) <= 0.1 * threshold) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          const double nkp = c * akp - s * akq;
          const double nkq = s * akp + c * akq;
          a[k * n + p] = a[p * n + k] = nkp;
          a[k * n + q] = a[q * n + k] = nkq;
        }
        if (v) {
          auto& vv = *v;
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = vv[k * n + p];
            const double vkq = vv[k * n + q];
            vv[k * n + p] = c * vkp - s * vkq;
            vv[k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Orthogonalizes `x` against the first `count` rows of `basis` (two passes of
// modified Gram-Schmidt) and returns the remaining norm.
double orthogonalize(std::span<double> x, const Matrix& basis, const std::vector<bool>& filled) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t r = 0; r < basis.rows(); ++r) {
      if (!filled[r]) continue;
      const double proj = dot(x, basis.row(r));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= proj * basis(r, i);
    }
  }
  return std::sqrt(dot(x, x));
}

}  // namespace

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("cannot add " + a.shape_string() + " and " + b.shape_string());
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("cannot subtract " + b.shape_string() + " from " + a.shape_string());
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& x : out.data()) x *= factor;
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix matvec(const Matrix& m, const Matrix& v) {
  if (v.cols() != 1) throw ShapeError("matvec needs a column vector, got " + v.shape_string());
  return matmul(m, v);
}

double trace(const Matrix& m) {
  require_square(m, "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

double determinant(const Matrix& m) {
  require_square(m, "determinant");
  const std::size_t n = m.rows();
  Matrix a = m;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (a(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return det;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

EigenResult sym_eigen(const Matrix& m, const JacobiOptions& opts) {
  std::vector<double> a = symmetric_copy(m);
  const std::size_t n = m.rows();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  jacobi(a, n, &v, opts);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

  EigenResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    out.values[r] = a[src * n + src];
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::fabs(v[k * n + src]) > 1e-12) {
        sign = v[k * n + src] < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = sign * v[k * n + src];
  }
  return out;
}

std::vector<double> sym_eigenvalues(const Matrix& m, const JacobiOptions& opts) {
  std::vector<double> a = symmetric_copy(m);
  const std::size_t n = m.rows();
  jacobi(a, n, nullptr, opts);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.empty()) throw ShapeError("singular values of an empty matrix");
  auto values = sym_eigenvalues(matmul(transpose(m), m));
  for (double& x : values) x = std::sqrt(std::max(x, 0.0));
  return values;
}

SvdResult svd(const Matrix& m) {
  if (m.empty()) throw ShapeError("SVD of an empty matrix");
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const std::size_t k = std::min(rows, cols);

  const EigenResult right = sym_eigen(matmul(transpose(m), m));
  SvdResult out;
  out.v = transpose(right.vectors);
  out.singular.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.singular[i] = std::sqrt(std::max(right.values[i], 0.0));

  const double rank_tol = (out.singular.empty() ? 0.0 : out.singular[0]) *
                          static_cast<double>(std::max(rows, cols)) * 1e-13;
  out.u = Matrix(rows, rows);
  std::vector<bool> filled(rows, false);
  std::vector<double> x(rows);
  for (std::size_t i = 0; i < k; ++i) {
    if (out.singular[i] <= rank_tol || out.singular[i] == 0.0) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) s += m(r, c) * out.v(c, i);
      x[r] = s / out.singular[i];
    }
    const double norm = orthogonalize(x, out.u, filled);
    for (std::size_t r = 0; r < rows; ++r) out.u(i, r) = x[r] / norm;
    filled[i] = true;
  }

  // Complete U from the eigenvectors of M M^T, then the standard basis.
  std::vector<std::vector<double>> candidates;
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    const EigenResult left = sym_eigen(matmul(m, transpose(m)));
    for (std::size_t r = 0; r < rows; ++r) {
      candidates.emplace_back(left.vectors.row(r).begin(), left.vectors.row(r).end());
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> e(rows, 0.0);
      e[r] = 1.0;
      candidates.push_back(std::move(e));
    }
  }
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < rows; ++slot) {
    if (filled[slot]) continue;
    while (next < candidates.size()) {
      x = candidates[next++];
      const double norm = orthogonalize(x, out.u, filled);
      if (norm > 0.1) {
        for (std::size_t r = 0; r < rows; ++r) out.u(slot, r) = x[r] / norm;
        filled[slot] = true;
        break;
      }
    }
  }
  return out;
}

Matrix invert(const Matrix& m) {
  require_square(m, "inversion");
  const std::size_t n = m.rows();
  const double scale_ref = m.max_abs();
  if (scale_ref == 0.0) throw Singular("zero matrix is singular");
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (std::fabs(a(piv, col)) < 1e-12 * scale_ref) {
      throw Singular("pivot " + std::to_string(a(piv, col)) + " in column " + std::to_string(col) +
                     " below 1e-12 * max|m|");
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

double condition_number(const Matrix& m) {
  require_square(m, "condition number");
  const auto s = singular_values(m);
  if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

}  // namespace linseq
