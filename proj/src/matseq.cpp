#include "linseq/matseq.hpp"

#include <algorithm>
#include <cctype>

#include "linseq/error.hpp"

namespace linseq {

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  std::size_t total = 0;
  for (const auto& t : tokens) total += t.size() + 1;
  out.reserve(total);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

TokenSeq split_tokens(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::size_t sequence_length(std::size_t rows, std::size_t cols, const SequenceLayout& layout) {
  return (layout.emit_dims ? 2 : 0) + rows * cols * static_cast<std::size_t>(layout.scheme.arity());
}

Matrix round_matrix(const Matrix& m, int digits) {
  Matrix out = m;
  for (double& x : out.data()) x = round_significant(x, digits);
  return out;
}

void append_matrix_tokens(const Matrix& m, const SequenceLayout& layout, TokenSeq& out) {
  if (m.rows() == 0 || m.cols() == 0) throw ShapeError("cannot serialize an empty matrix");
  if (layout.emit_dims) {
    out.push_back(dimension_token(m.rows()));
    out.push_back(dimension_token(m.cols()));
  }
  const auto where = [](std::size_t r, std::size_t c) {
    return " at (" + std::to_string(r) + ", " + std::to_string(c) + ")";
  };
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      FloatTriplet t;
      try {
        t = round_to_triplet(m(r, c), layout.scheme.precision_digits);
      } catch (const OverflowError& e) {
        throw OverflowError(e.what() + where(r, c));
      }
      try {
        check_encodable(t, layout.scheme);
      } catch (const RangeError& e) {
        throw RangeError(e.what() + where(r, c));
      }
      append_encoded(t, layout.scheme, out);
    }
  }
}

TokenSeq matrix_to_tokens(const Matrix& m, const SequenceLayout& layout) {
  TokenSeq out;
  out.reserve(sequence_length(m.rows(), m.cols(), layout));
  append_matrix_tokens(m, layout, out);
  return out;
}

Matrix tokens_to_matrix(std::span<const std::string> tokens, const SequenceLayout& layout,
                        std::optional<std::pair<std::size_t, std::size_t>> shape) {
  std::size_t pos = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (layout.emit_dims) {
    if (tokens.size() < 2) throw ParseError("missing dimension tokens", tokens.size());
    auto r = parse_dimension_token(tokens[0]);
    if (!r) throw ParseError("expected row dimension token, got '" + tokens[0] + "'", 0);
    auto c = parse_dimension_token(tokens[1]);
    if (!c) throw ParseError("expected column dimension token, got '" + tokens[1] + "'", 1);
    rows = *r;
    cols = *c;
    pos = 2;
    if (shape && (shape->first != rows || shape->second != cols)) {
      throw ParseError("matrix is " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", expected " + std::to_string(shape->first) + "x" +
                           std::to_string(shape->second),
                       0);
    }
  } else {
    if (!shape) throw ParseError("layout without dimension tokens needs an explicit shape", 0);
    rows = shape->first;
    cols = shape->second;
  }
  const auto arity = static_cast<std::size_t>(layout.scheme.arity());
  const std::size_t remaining = tokens.size() - pos;
  // rows, cols <= remaining keeps the product below overflow.
  if (rows > remaining || cols > remaining || rows * cols * arity != remaining) {
    throw ParseError("element count mismatch: " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " needs " + std::to_string(rows * cols * arity) +
                         " coefficient tokens, found " + std::to_string(remaining),
                     std::min(tokens.size(), pos + rows * cols * arity));
  }
  Matrix m(rows, cols);
  for (double& x : m.data()) x = triplet_to_value(decode_number_at(tokens, pos, layout.scheme));
  return m;
}

ParsedMatrix try_tokens_to_matrix(std::span<const std::string> tokens,
                                  const SequenceLayout& layout,
                                  std::optional<std::pair<std::size_t, std::size_t>> shape) noexcept {
  ParsedMatrix out;
  try {
    out.matrix = tokens_to_matrix(tokens, layout, shape);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

Matrix concat_operands(std::span<const Matrix> operands, Axis axis) {
  if (operands.empty()) throw ShapeError("no operands to concatenate");
  const std::size_t r0 = operands[0].rows();
  const std::size_t c0 = operands[0].cols();
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const auto& m : operands) {
    if (axis == Axis::Cols) {
      if (m.rows() != r0) throw ShapeError("row counts differ: " + m.shape_string());
      cols += m.cols();
      rows = r0;
    } else {
      if (m.cols() != c0) throw ShapeError("column counts differ: " + m.shape_string());
      rows += m.rows();
      cols = c0;
    }
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& m : operands) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (axis == Axis::Cols) {
          out(i, offset + j) = m(i, j);
        } else {
          out(offset + i, j) = m(i, j);
        }
      }
    }
    offset += axis == Axis::Cols ? m.cols() : m.rows();
  }
  return out;
}

Matrix stack_eigen_output(std::span<const double> values, const Matrix& q) {
  if (q.rows() != values.size() || q.cols() != values.size()) {
    throw ShapeError("eigenvector matrix " + q.shape_string() + " does not match " +
                     std::to_string(values.size()) + " eigenvalues");
  }
  const Matrix head(1, values.size(), std::vector<double>(values.begin(), values.end()));
  const Matrix parts[] = {head, q};
  return concat_operands(parts, Axis::Rows);
}

EigenParts split_eigen_output(const Matrix& stacked) {
  const std::size_t n = stacked.cols();
  if (stacked.rows() != n + 1) {
    throw ShapeError("eigen output must be (n+1)xn, got " + stacked.shape_string());
  }
  EigenParts out;
  out.values.assign(stacked.row(0).begin(), stacked.row(0).end());
  out.q = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.q(i, j) = stacked(i + 1, j);
  }
  return out;
}

Matrix stack_svd_output(std::span<const double> singular, const Matrix& u, const Matrix& v) {
  const std::size_t m = u.rows();
  const std::size_t n = v.rows();
  const std::size_t k = std::min(m, n);
  if (!u.is_square() || !v.is_square() || singular.size() != k) {
    throw ShapeError("inconsistent SVD factors: U " + u.shape_string() + ", V " + v.shape_string() +
                     ", " + std::to_string(singular.size()) + " singular values");
  }
  Matrix out(m + n + 1, k);
  for (std::size_t j = 0; j < k; ++j) {
    out(0, j) = singular[j];
    for (std::size_t i = 0; i < m; ++i) out(1 + i, j) = u(j, i);
    for (std::size_t i = 0; i < n; ++i) out(1 + m + i, j) = v(i, j);
  }
  return out;
}

SvdParts split_svd_output(const Matrix& stacked, std::size_t m, std::size_t n) {
  const std::size_t k = std::min(m, n);
  if (stacked.rows() != m + n + 1 || stacked.cols() != k) {
    throw ShapeError("SVD output for " + std::to_string(m) + "x" + std::to_string(n) +
                     " must be " + std::to_string(m + n + 1) + "x" + std::to_string(k) + ", got " +
                     stacked.shape_string());
  }
  SvdParts out;
  out.singular.assign(stacked.row(0).begin(), stacked.row(0).end());
  out.u = Matrix(k, m);
  out.v = Matrix(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) out.u(j, i) = stacked(1 + i, j);
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = stacked(1 + m + i, j);
  }
  return out;
}

}  // namespace linseq
