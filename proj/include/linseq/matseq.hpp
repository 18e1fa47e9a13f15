#pragma once

// Matrix <-> token sequence serialization.
//
// A rows x cols matrix becomes [V<rows>, V<cols>, c_00, c_01, ..., c_(r-1)(c-1)]
// with every coefficient rounded to the scheme's precision and encoded in
// row-major order.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linseq/matrix.hpp"
#include "linseq/numcodec.hpp"

namespace linseq {

using TokenSeq = std::vector<std::string>;

struct SequenceLayout {
  EncodingScheme scheme = EncodingScheme::p10();
  bool emit_dims = true;
};

std::string join_tokens(std::span<const std::string> tokens);
TokenSeq split_tokens(std::string_view text);

/// 2 + rows * cols * arity (without the 2 when dimensions are not emitted).
std::size_t sequence_length(std::size_t rows, std::size_t cols, const SequenceLayout& layout);

/// Coefficient-wise round_significant.
Matrix round_matrix(const Matrix& m, int digits);

/// Throws OverflowError / RangeError naming the offending (row, col).
TokenSeq matrix_to_tokens(const Matrix& m, const SequenceLayout& layout);
void append_matrix_tokens(const Matrix& m, const SequenceLayout& layout, TokenSeq& out);

/// Strict inverse of matrix_to_tokens: the whole span must be consumed.
/// When the layout carries no dimension tokens `shape` must be given.
/// Throws ParseError.
Matrix tokens_to_matrix(std::span<const std::string> tokens, const SequenceLayout& layout,
                        std::optional<std::pair<std::size_t, std::size_t>> shape = std::nullopt);

struct ParsedMatrix {
  std::optional<Matrix> matrix;
  std::string error;

  bool well_formed() const noexcept { return matrix.has_value(); }
};

/// Non-throwing tokens_to_matrix.
ParsedMatrix try_tokens_to_matrix(
    std::span<const std::string> tokens, const SequenceLayout& layout,
    std::optional<std::pair<std::size_t, std::size_t>> shape = std::nullopt) noexcept;

enum class Axis { Rows, Cols };

/// Joins operands side by side (Cols) or on top of each other (Rows).
/// Throws ShapeError on mismatched shapes or an empty list.
Matrix concat_operands(std::span<const Matrix> operands, Axis axis);

/// (n+1) x n: the eigenvalues on the first row, then Q (rows are eigenvectors).
Matrix stack_eigen_output(std::span<const double> values, const Matrix& q);

struct EigenParts {
  std::vector<double> values;
  Matrix q;
};
/// Inverse of stack_eigen_output. Throws ShapeError unless rows == cols + 1.
EigenParts split_eigen_output(const Matrix& stacked);

/// (m+n+1) x k with k = min(m, n): singular values on the first row, then the
/// m x k block of left singular vectors as columns (the first k rows of U,
/// transposed), then the n x k block of right singular vectors (the first k
/// columns of V). With S = U M V, U is m x m and V is n x n.
Matrix stack_svd_output(std::span<const double> singular, const Matrix& u, const Matrix& v);

struct SvdParts {
  std::vector<double> singular;  // k values
  Matrix u;                      // k x m, rows are left singular vectors
  Matrix v;                      // n x k, columns are right singular vectors
};
/// Inverse of stack_svd_output for an m x n source matrix.
SvdParts split_svd_output(const Matrix& stacked, std::size_t m, std::size_t n);

}  // namespace linseq
