#pragma once

// Example and dataset generation for the nine tasks.
//
// Operand conventions (M is m x n):
//   transpose        M                  -> M^T            (n x m)
//   add              [M | N], N m x n   -> M + N          (m x n)
//   matvec           [M | v], v m x 1   -> M^T v          (n x 1)
//   matmul           [M | N], N m x n   -> M^T N          (n x n)
//   eigenvalues      M symmetric        -> values         (n x 1, descending)
//   eigenvectors     M symmetric        -> [values; Q]    ((n+1) x n)
//   singular_values  M                  -> values         (min(m, n) x 1, descending)
//   svd              M                  -> [S; U^T; V]    ((m+n+1) x min(m, n))
//   invert           M square           -> M^-1           (n x n)

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linseq/matrix.hpp"
#include "linseq/matseq.hpp"
#include "linseq/numcodec.hpp"
#include "linseq/randmat.hpp"

namespace linseq {

enum class TaskKind {
  Transpose,
  Add,
  Matvec,
  Matmul,
  Eigenvalues,
  Eigenvectors,
  SingularValues,
  Svd,
  Invert,
};

inline constexpr TaskKind kAllTasks[] = {
    TaskKind::Transpose,   TaskKind::Add,          TaskKind::Matvec,
    TaskKind::Matmul,      TaskKind::Eigenvalues,  TaskKind::Eigenvectors,
    TaskKind::SingularValues, TaskKind::Svd,       TaskKind::Invert,
};

std::string_view to_string(TaskKind t);
/// Accepts the snake_case names above. Throws std::invalid_argument.
TaskKind parse_task_kind(std::string_view name);
/// Transpose, Add, Dot, Mul, Eigval, Eigvec, Sing, Svd, Inv.
std::string_view default_prefix(TaskKind t);
bool requires_symmetric(TaskKind t);
bool requires_square(TaskKind t);

/// Shape of the concatenated input and of the target for an m x n operand.
Shape input_shape(TaskKind t, std::size_t m, std::size_t n);
Shape output_shape(TaskKind t, std::size_t m, std::size_t n);

/// Reference output for the given operands (one, or two for add/matvec/matmul).
/// Throws ShapeError, Singular, NoConvergence, NotSymmetric.
Matrix compute_target(TaskKind t, std::span<const Matrix> operands);

/// Splits a concatenated input back into operands.
std::vector<Matrix> split_input(TaskKind t, const Matrix& input);

struct MatrixTask {
  TaskKind kind = TaskKind::Transpose;
  EnsembleSpec input_spec;  // per operand; matvec draws v with symmetric = false
  EncodingScheme scheme_in = EncodingScheme::p10();
  EncodingScheme scheme_out = EncodingScheme::p10();
  double noise_level = 0.0;  // in units of the coefficient std
  // Compute the target from the noisy input instead of the clean one.
  bool noisy_target = false;
  std::optional<std::string> prefix;
  // invert only: reject draws with a larger condition number.
  std::optional<double> max_condition;
  // Reject shapes whose input sequence is longer (0 = no cap).
  std::size_t max_input_tokens = 0;
  int max_attempts = 100;

  /// A task with the defaults used throughout: U[-10, 10] coefficients,
  /// symmetric input for eigen tasks and svd.
  static MatrixTask make(TaskKind kind, DimRange dims = DimRange::fixed(5, 5));

  /// Throws std::invalid_argument.
  void validate() const;
};

struct ExampleRecord {
  TaskKind task = TaskKind::Transpose;
  std::size_t index = 0;
  std::uint64_t seed = 0;  // seed of the accepted attempt
  std::size_t m = 0;       // operand rows
  std::size_t n = 0;       // operand cols
  std::optional<std::string> prefix;
  Matrix clean_input;  // rounded to the input precision, before noise
  Matrix target;       // rounded to the output precision
  TokenSeq input_tokens;
  TokenSeq output_tokens;
};

/// Example `index` of the stream started from `global_seed`. Attempt k draws
/// from derive_seed(derive_seed(global_seed, index), k). Draws are rejected on
/// Singular, NoConvergence, the condition cap, the token cap, or coefficients
/// the schemes cannot express. Throws ResampleExhausted after max_attempts.
ExampleRecord make_example(const MatrixTask& task, std::size_t index, std::uint64_t global_seed);

struct WeightedTask {
  MatrixTask task;
  double weight = 1.0;
};

struct GenerateOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  std::size_t chunk = 4096;
  bool include_values = true;  // write clean_input / target
};

/// Writes `count` records to `path` (one JSON object per line) and the
/// manifest to `path + ".manifest.json"`. Output is byte-identical for any
/// thread count. Throws IoError.
void write_dataset(const MatrixTask& task, std::size_t count, std::uint64_t global_seed,
                   const std::string& path, const GenerateOptions& opts = {});

/// Record i picks its task by a weighted draw seeded from (global_seed, i);
/// the task prefix (default_prefix unless set) leads both token lists.
/// Throws std::invalid_argument on duplicate prefixes.
void make_joint_dataset(const std::vector<WeightedTask>& tasks, std::size_t count,
                        std::uint64_t global_seed, const std::string& path,
                        const GenerateOptions& opts = {});

/// In-memory variants, same records as the file writers.
std::vector<ExampleRecord> generate(const MatrixTask& task, std::size_t count,
                                    std::uint64_t global_seed, unsigned threads = 0);
std::vector<ExampleRecord> generate_joint(const std::vector<WeightedTask>& tasks, std::size_t count,
                                          std::uint64_t global_seed, unsigned threads = 0);

struct NamedEnsemble {
  std::string name;
  EnsembleSpec spec;
};

struct OodSuite {
  std::vector<NamedEnsemble> train;  // 7 rows
  std::vector<NamedEnsemble> test;   // 11 columns
};

/// Train and test ensembles for out-of-distribution eigenvalue experiments on
/// 5 x 5 symmetric matrices. Spectral test laws are scaled to the baseline
/// eigenvalue std (12.91); Wigner tests rescale the coefficient width.
OodSuite ood_suite();

}  // namespace linseq
