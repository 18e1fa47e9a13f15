#pragma once

// Scoring of predicted token sequences.
//
// A prediction is correct when it parses into a matrix of the expected shape
// and its task-specific relative error is below the tolerance:
//   generic        ||P - O|| / ||O||
//   eigenvectors   ||Q I Q^T - D|| / ||D||        (Q rows, D from the prediction)
//   svd            ||U I V - S|| / ||S||
//   invert         ||P I - Id|| / ||Id||          (absolute with strict_inverse)
// An inverse prediction equal to the rounded reference inverse scores 0 unless
// strict_inverse is set.
// A zero error counts as correct at any tolerance, including 0.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linseq/dataset_io.hpp"
#include "linseq/matrix.hpp"
#include "linseq/matseq.hpp"
#include "linseq/taskgen.hpp"

namespace linseq {

// L2 is the sum of squares, without the square root.
enum class Norm { L1, L2, Linf };

std::string_view to_string(Norm n);
/// "l1", "l2", "linf" (case insensitive). Throws std::invalid_argument.
Norm parse_norm(std::string_view name);

double matrix_norm(const Matrix& a, Norm norm);
/// ||P - O|| / ||O||; +inf when ||O|| == 0 < ||P - O||, 0 when both vanish.
/// Throws ShapeError.
double rel_error(const Matrix& p, const Matrix& o, Norm norm);

enum class Verdict { Correct, Incorrect, IllFormed };
std::string_view to_string(Verdict v);

/// Everything the verifier needs about one example.
struct TaskContext {
  TaskKind task = TaskKind::Transpose;
  std::size_t m = 0;
  std::size_t n = 0;
  Matrix input;   // clean input, concatenated operands
  Matrix target;  // reference output
  EncodingScheme scheme_out = EncodingScheme::p10();
  std::optional<std::string> prefix;  // required first token of predictions
};

struct CheckOptions {
  bool strict_inverse = false;
};

/// Decodes a prediction: strips the prefix, parses, checks the composite shape.
ParsedMatrix parse_prediction(const TaskContext& ctx, std::span<const std::string> tokens);

/// Task error of an already parsed prediction.
double prediction_error(const TaskContext& ctx, const Matrix& predicted, Norm norm,
                        const CheckOptions& opts = {});

/// nullopt when the prediction is ill-formed.
std::optional<double> score_prediction(const TaskContext& ctx, std::span<const std::string> tokens,
                                       Norm norm, const CheckOptions& opts = {});

Verdict check_prediction(const TaskContext& ctx, std::span<const std::string> tokens,
                         double tolerance, Norm norm, const CheckOptions& opts = {});

inline bool within_tolerance(double error, double tolerance) {
  return error < tolerance || error == 0.0;
}

struct EigvecDiagnostics {
  double eigenvalue_error = 0.0;           // L1, predicted vs reference eigenvalues
  std::vector<double> column_norms;        // of H = Q^T
  std::vector<double> successive_dots;     // <h_i, h_(i+1)>
  double weak_residual = 0.0;              // ||H D H^T - I||_1 / ||I||_1
  double condition = 0.0;                  // cond(H)
};

/// `input` is the symmetric input, `predicted` the (n+1) x n eigen output.
EigvecDiagnostics eigvec_diagnostics(const Matrix& input, const Matrix& predicted);

inline constexpr double kOrthogonalCond = 1.035;
inline constexpr double kNonOrthogonalCond = 1.04;
enum class Orthogonality { Orthogonal, Between, NotOrthogonal };
Orthogonality classify_orthogonality(double condition);

struct InverseDiagnostics {
  double product_residual = 0.0;  // ||P I - Id||_1 / n
  double distance = 0.0;          // ||P - I^-1||_1 / ||I^-1||_1
  double condition = 0.0;         // cond(I)
};

/// Throws Singular when `input` has no inverse.
InverseDiagnostics inverse_diagnostics(const Matrix& input, const Matrix& predicted);
InverseDiagnostics inverse_diagnostics(const Matrix& input, const Matrix& predicted,
                                       const Matrix& true_inverse);

inline constexpr double kIllConditioned = 51.5;

struct AccuracyTable {
  std::vector<double> tolerances;
  std::vector<Norm> norms;
  std::vector<std::vector<std::size_t>> correct;  // [tolerance][norm]

  void reset(std::vector<double> tols, std::vector<Norm> ns);
  double rate(std::size_t tol_index, std::size_t norm_index, std::size_t total) const;
};

struct TaskReport {
  TaskKind task = TaskKind::Transpose;
  std::size_t total = 0;
  std::size_t well_formed = 0;
  AccuracyTable accuracy;
};

struct DiagnosticsSummary {
  double tolerance = 0.05;
  // eigenvectors: verdict (L1) x orthogonality bucket of cond(H)
  std::size_t eig_records = 0;
  std::size_t eig_values_correct = 0;
  std::size_t eig_weak_correct = 0;
  std::size_t eig_buckets[2][3] = {};  // [correct][Orthogonality]
  // invert: verdict (L1) x cond(I) > 51.5
  std::size_t inv_records = 0;
  std::size_t inv_buckets[2][2] = {};  // [correct][ill_conditioned]
  double inv_mean_residual = 0.0;
  double inv_mean_distance = 0.0;
};

struct EvalOptions {
  std::vector<double> tolerances = {0.005, 0.01, 0.02, 0.05};
  std::vector<Norm> norms = {Norm::L1, Norm::L2, Norm::Linf};
  CheckOptions check;
  bool diagnostics = false;
  double diagnostic_tolerance = 0.05;
  unsigned threads = 0;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t well_formed = 0;
  AccuracyTable accuracy;
  std::vector<TaskReport> per_task;  // in manifest order, tasks that occur
  std::optional<DiagnosticsSummary> diagnostics;

  double rate(std::size_t tol_index, std::size_t norm_index) const {
    return accuracy.rate(tol_index, norm_index, total);
  }
  /// Human-readable table.
  void write_table(std::ostream& os) const;
  /// scope,tolerance,<norm>... with one row per (scope, tolerance); scope is
  /// "all" or a task name. Rates in [0, 1].
  void write_csv(std::ostream& os) const;
};

/// Context for a dataset record under its manifest task.
TaskContext make_context(const DatasetRecord& r, const ManifestTask& task);
const ManifestTask& find_task(const Manifest& m, const DatasetRecord& r);

/// Throws IoError on misaligned counts.
EvalReport evaluate(const Manifest& manifest, const std::vector<DatasetRecord>& records,
                    const std::vector<TokenSeq>& predictions, const EvalOptions& opts = {});

/// One prediction per line. Throws IoError on an unreadable or empty file.
std::vector<TokenSeq> read_predictions(const std::string& path);

/// Reads the dataset, its manifest and the predictions, then evaluates.
EvalReport score_file(const std::string& dataset_path, const std::string& predictions_path,
                      const EvalOptions& opts = {});

}  // namespace linseq
