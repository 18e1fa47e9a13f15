#include "linseq/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "linseq/error.hpp"
#include "linseq/linalg.hpp"
#include "parallel.hpp"

namespace linseq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const std::string> strip_prefix(std::span<const std::string> tokens,
                                          const std::optional<std::string>& prefix, bool& ok) {
  ok = true;
  if (!prefix) return tokens;
  if (tokens.empty() || tokens.front() != *prefix) {
    ok = false;
    return {};
  }
  return tokens.subspan(1);
}

// ||a - b|| / ||b||, except that a vanishing reference only matches when the
// matrix being decomposed vanishes too.
double reconstruction_error(const Matrix& a, const Matrix& b, const Matrix& input, Norm norm) {
  if (matrix_norm(b, norm) == 0.0 && matrix_norm(input, norm) > 0.0) return kInf;
  return rel_error(a, b, norm);
}

}  // namespace

std::string_view to_string(Norm n) {
  switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
  }
  return "?";
}

Norm parse_norm(std::string_view name) {
  std::string s(name);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Norm n : {Norm::L1, Norm::L2, Norm::Linf})
    if (to_string(n) == s) return n;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "correct";
    case Verdict::Incorrect: return "incorrect";
    case Verdict::IllFormed: return "ill_formed";
  }
  return "?";
}

double matrix_norm(const Matrix& a, Norm norm) {
  double s = 0.0;
  for (double x : a.data()) {
    switch (norm) {
      case Norm::L1: s += std::fabs(x); break;
      case Norm::L2: s += x * x; break;
      case Norm::Linf: s = std::max(s, std::fabs(x)); break;
    }
  }
  return s;
}

double rel_error(const Matrix& p, const Matrix& o, Norm norm) {
  if (p.rows() != o.rows() || p.cols() != o.cols())
    throw ShapeError("rel_error: " + p.shape_string() + " vs " + o.shape_string());
  const double diff = matrix_norm(subtract(p, o), norm);
  const double ref = matrix_norm(o, norm);
  if (diff == 0.0) return 0.0;
  if (ref == 0.0) return kInf;
  return diff / ref;
}

ParsedMatrix parse_prediction(const TaskContext& ctx, std::span<const std::string> tokens) {
  bool ok = true;
  const auto body = strip_prefix(tokens, ctx.prefix, ok);
  if (!ok) return {std::nullopt, "missing task prefix '" + *ctx.prefix + "'"};
  ParsedMatrix p = try_tokens_to_matrix(body, SequenceLayout{ctx.scheme_out, true});
  if (!p.well_formed()) return p;
  const Shape want = output_shape(ctx.task, ctx.m, ctx.n);
  if (p.matrix->rows() != want.rows || p.matrix->cols() != want.cols) {
    return {std::nullopt, "expected a " + std::to_string(want.rows) + "x" +
                              std::to_string(want.cols) + " matrix, got " +
                              p.matrix->shape_string()};
  }
  return p;
}

double prediction_error(const TaskContext& ctx, const Matrix& predicted, Norm norm,
                        const CheckOptions& opts) {
  switch (ctx.task) {
    case TaskKind::Eigenvectors: {
      const EigenParts parts = split_eigen_output(predicted);
      const Matrix d = Matrix::diagonal(parts.values);
      const Matrix qiq = matmul(matmul(parts.q, ctx.input), transpose(parts.q));
      return reconstruction_error(qiq, d, ctx.input, norm);
    }
    case TaskKind::Svd: {
      const SvdParts parts = split_svd_output(predicted, ctx.m, ctx.n);
      const Matrix s = Matrix::diagonal(parts.singular);
      const Matrix uiv = matmul(matmul(parts.u, ctx.input), parts.v);
      return reconstruction_error(uiv, s, ctx.input, norm);
    }
    case TaskKind::Invert: {
      // The correctly rounded inverse is the best answer the output precision
      // allows, even when cond(I) makes its PI - Id residual large.
      if (!opts.strict_inverse && predicted == ctx.target) return 0.0;
      const Matrix id = Matrix::identity(ctx.input.rows());
      const double r = matrix_norm(subtract(matmul(predicted, ctx.input), id), norm);
      return opts.strict_inverse ? r : r / matrix_norm(id, norm);
    }
    default: return rel_error(predicted, ctx.target, norm);
  }
}

std::optional<double> score_prediction(const TaskContext& ctx, std::span<const std::string> tokens,
                                       Norm norm, const CheckOptions& opts) {
  const ParsedMatrix p = parse_prediction(ctx, tokens);
  if (!p.well_formed()) return std::nullopt;
  return prediction_error(ctx, *p.matrix, norm, opts);
}

Verdict check_prediction(const TaskContext& ctx, std::span<const std::string> tokens,
                         double tolerance, Norm norm, const CheckOptions& opts) {
  const auto err = score_prediction(ctx, tokens, norm, opts);
  if (!err) return Verdict::IllFormed;
  return within_tolerance(*err, tolerance) ? Verdict::Correct : Verdict::Incorrect;
}

EigvecDiagnostics eigvec_diagnostics(const Matrix& input, const Matrix& predicted) {
  const EigenParts parts = split_eigen_output(predicted);
  const Matrix& q = parts.q;  // rows are the columns of H
  const std::size_t n = q.rows();
  EigvecDiagnostics d;
  d.eigenvalue_error =
      rel_error(Matrix::column(parts.values), Matrix::column(sym_eigenvalues(input)), Norm::L1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : q.row(i)) s += x * x;
    d.column_norms.push_back(std::sqrt(s));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.cols(); ++k) s += q(i, k) * q(i + 1, k);
    d.successive_dots.push_back(s);
  }
  const Matrix hdh = matmul(matmul(transpose(q), Matrix::diagonal(parts.values)), q);
  const double ref = matrix_norm(input, Norm::L1);
  const double diff = matrix_norm(subtract(hdh, input), Norm::L1);
  d.weak_residual = diff == 0.0 ? 0.0 : (ref == 0.0 ? kInf : diff / ref);
  d.condition = condition_number(q);
  return d;
}

Orthogonality classify_orthogonality(double condition) {
  if (condition <= kOrthogonalCond) return Orthogonality::Orthogonal;
  if (condition >= kNonOrthogonalCond) return Orthogonality::NotOrthogonal;
  return Orthogonality::Between;
}

InverseDiagnostics inverse_diagnostics(const Matrix& input, const Matrix& predicted) {
  return inverse_diagnostics(input, predicted, invert(input));
}

InverseDiagnostics inverse_diagnostics(const Matrix& input, const Matrix& predicted,
                                       const Matrix& true_inverse) {
  const std::size_t n = input.rows();
  InverseDiagnostics d;
  const Matrix r = subtract(matmul(predicted, input), Matrix::identity(n));
  d.product_residual = matrix_norm(r, Norm::L1) / static_cast<double>(n);
  d.distance = rel_error(predicted, true_inverse, Norm::L1);
  d.condition = condition_number(input);
  return d;
}

void AccuracyTable::reset(std::vector<double> tols, std::vector<Norm> ns) {
  tolerances = std::move(tols);
  norms = std::move(ns);
  correct.assign(tolerances.size(), std::vector<std::size_t>(norms.size(), 0));
}

double AccuracyTable::rate(std::size_t t, std::size_t k, std::size_t total) const {
  return total == 0 ? 0.0 : static_cast<double>(correct.at(t).at(k)) / static_cast<double>(total);
}

namespace {

void table_rows(std::ostream& os, const AccuracyTable& a, std::size_t total) {
  char buf[64];
  os << "  tolerance";
  for (Norm n : a.norms) {
    std::snprintf(buf, sizeof buf, "%9s", std::string(to_string(n)).c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t t = 0; t < a.tolerances.size(); ++t) {
    std::snprintf(buf, sizeof buf, "  %8.3g%%", a.tolerances[t] * 100.0);
    os << buf;
    for (std::size_t k = 0; k < a.norms.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%9.2f", 100.0 * a.rate(t, k, total));
      os << buf;
    }
    os << '\n';
  }
}

void csv_rows(std::ostream& os, std::string_view scope, const AccuracyTable& a,
              std::size_t total) {
  char buf[64];
  for (std::size_t t = 0; t < a.tolerances.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.6g", a.tolerances[t]);
    os << scope << ',' << buf;
    for (std::size_t k = 0; k < a.norms.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", a.rate(t, k, total));
      os << ',' << buf;
    }
    os << '\n';
  }
}

std::string percent(std::size_t num, std::size_t den) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", den ? 100.0 * num / den : 0.0);
  return buf;
}

}  // namespace

void EvalReport::write_table(std::ostream& os) const {
  os << "records " << total << ", well-formed " << well_formed << " (" << percent(well_formed, total)
     << ")\n";
  table_rows(os, accuracy, total);
  if (per_task.size() > 1) {
    for (const auto& t : per_task) {
      os << to_string(t.task) << ": records " << t.total << ", well-formed " << t.well_formed
         << '\n';
      table_rows(os, t.accuracy, t.total);
    }
  }
  if (!diagnostics) return;
  const auto& d = *diagnostics;
  char tol[32];
  std::snprintf(tol, sizeof tol, "%.3g%%", d.tolerance * 100.0);
  if (d.eig_records) {
    os << "eigenvector diagnostics at " << tol << " (l1), " << d.eig_records << " predictions\n"
       << "  eigenvalues correct   " << percent(d.eig_values_correct, d.eig_records) << '\n'
       << "  weak problem correct  " << percent(d.eig_weak_correct, d.eig_records) << '\n'
       << "  cond(H)              <=1.035   between   >=1.04\n";
    for (int c = 1; c >= 0; --c) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %-20s %7zu %9zu %8zu\n", c ? "correct" : "incorrect",
                    d.eig_buckets[c][0], d.eig_buckets[c][1], d.eig_buckets[c][2]);
      os << buf;
    }
  }
  if (d.inv_records) {
    char buf[128];
    os << "inverse diagnostics at " << tol << " (l1), " << d.inv_records << " predictions\n";
    std::snprintf(buf, sizeof buf, "  mean ||PI-Id||/n %.4g, mean ||P-I^-1||/||I^-1|| %.4g\n",
                  d.inv_mean_residual, d.inv_mean_distance);
    os << buf << "  cond(I)              <=51.5    >51.5\n";
    for (int c = 1; c >= 0; --c) {
      std::snprintf(buf, sizeof buf, "  %-20s %6zu %8zu\n", c ? "correct" : "incorrect",
                    d.inv_buckets[c][0], d.inv_buckets[c][1]);
      os << buf;
    }
  }
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "scope,tolerance";
  for (Norm n : accuracy.norms) os << ',' << to_string(n);
  os << '\n';
  csv_rows(os, "all", accuracy, total);
  if (per_task.size() > 1)
    for (const auto& t : per_task) csv_rows(os, to_string(t.task), t.accuracy, t.total);
}

const ManifestTask& find_task(const Manifest& m, const DatasetRecord& r) {
  for (const auto& t : m.tasks) {
    if (r.prefix ? (t.prefix == r.prefix) : (t.kind == r.task)) return t;
  }
  throw IoError("record " + std::to_string(r.index) + " matches no manifest task");
}

TaskContext make_context(const DatasetRecord& r, const ManifestTask& task) {
  TaskContext ctx;
  ctx.task = r.task;
  ctx.m = r.m;
  ctx.n = r.n;
  ctx.scheme_out = task.scheme_out;
  ctx.prefix = r.prefix;
  const Shape in = input_shape(r.task, r.m, r.n);
  const Shape out = output_shape(r.task, r.m, r.n);
  try {
    bool ok = true;
    if (r.clean_input) {
      ctx.input = Matrix(in.rows, in.cols, *r.clean_input);
    } else {
      const auto body = strip_prefix(r.input_tokens, r.prefix, ok);
      if (!ok) throw IoError("input tokens lack the task prefix");
      ctx.input = tokens_to_matrix(body, SequenceLayout{task.scheme_in, true});
    }
    const auto body = strip_prefix(r.output_tokens, r.prefix, ok);
    if (!ok) throw IoError("output tokens lack the task prefix");
    ctx.target = tokens_to_matrix(body, SequenceLayout{task.scheme_out, true});
  } catch (const Error& e) {
    throw IoError("record " + std::to_string(r.index) + ": " + e.what());
  }
  if (ctx.input.rows() != in.rows || ctx.input.cols() != in.cols ||
      ctx.target.rows() != out.rows || ctx.target.cols() != out.cols)
    throw IoError("record " + std::to_string(r.index) + ": shapes do not match the task");
  return ctx;
}

namespace {

struct RecordResult {
  std::size_t task_slot = 0;
  bool well_formed = false;
  std::vector<double> errors;  // per norm
  double l1_error = kInf;
  std::optional<EigvecDiagnostics> eig;
  std::optional<InverseDiagnostics> inv;
};

}  // namespace

EvalReport evaluate(const Manifest& manifest, const std::vector<DatasetRecord>& records,
                    const std::vector<TokenSeq>& predictions, const EvalOptions& opts) {
  if (predictions.size() != records.size())
    throw IoError("misaligned files: " + std::to_string(records.size()) + " records, " +
                  std::to_string(predictions.size()) + " predictions");
  if (opts.tolerances.empty() || opts.norms.empty())
    throw std::invalid_argument("need at least one tolerance and one norm");

  std::vector<RecordResult> results(records.size());
  detail::parallel_for(0, records.size(), opts.threads, [&](std::size_t i) {
    const DatasetRecord& r = records[i];
    const ManifestTask& mt = find_task(manifest, r);
    RecordResult& res = results[i];
    res.task_slot = static_cast<std::size_t>(&mt - manifest.tasks.data());
    const TaskContext ctx = make_context(r, mt);
    const ParsedMatrix p = parse_prediction(ctx, predictions[i]);
    res.errors.assign(opts.norms.size(), kInf);
    if (!p.well_formed()) return;
    res.well_formed = true;
    for (std::size_t k = 0; k < opts.norms.size(); ++k)
      res.errors[k] = prediction_error(ctx, *p.matrix, opts.norms[k], opts.check);
    res.l1_error = prediction_error(ctx, *p.matrix, Norm::L1, opts.check);
    if (!opts.diagnostics) return;
    if (r.task == TaskKind::Eigenvectors) {
      res.eig = eigvec_diagnostics(ctx.input, *p.matrix);
    } else if (r.task == TaskKind::Invert) {
      try {
        res.inv = inverse_diagnostics(ctx.input, *p.matrix);
      } catch (const Singular&) {
      }
    }
  });

  EvalReport rep;
  rep.accuracy.reset(opts.tolerances, opts.norms);
  std::vector<TaskReport> slots(manifest.tasks.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    slots[s].task = manifest.tasks[s].kind;
    slots[s].accuracy.reset(opts.tolerances, opts.norms);
  }
  DiagnosticsSummary diag;
  diag.tolerance = opts.diagnostic_tolerance;

  for (const auto& res : results) {
    TaskReport& tr = slots[res.task_slot];
    ++rep.total;
    ++tr.total;
    if (!res.well_formed) continue;
    ++rep.well_formed;
    ++tr.well_formed;
    for (std::size_t t = 0; t < opts.tolerances.size(); ++t)
      for (std::size_t k = 0; k < opts.norms.size(); ++k)
        if (within_tolerance(res.errors[k], opts.tolerances[t])) {
          ++rep.accuracy.correct[t][k];
          ++tr.accuracy.correct[t][k];
        }
    const int ok = within_tolerance(res.l1_error, diag.tolerance) ? 1 : 0;
    if (res.eig) {
      ++diag.eig_records;
      if (within_tolerance(res.eig->eigenvalue_error, diag.tolerance)) ++diag.eig_values_correct;
      if (within_tolerance(res.eig->weak_residual, diag.tolerance)) ++diag.eig_weak_correct;
      ++diag.eig_buckets[ok][static_cast<int>(classify_orthogonality(res.eig->condition))];
    }
    if (res.inv) {
      ++diag.inv_records;
      diag.inv_mean_residual += res.inv->product_residual;
      diag.inv_mean_distance += res.inv->distance;
      ++diag.inv_buckets[ok][res.inv->condition > kIllConditioned ? 1 : 0];
    }
  }
  if (diag.inv_records) {
    diag.inv_mean_residual /= static_cast<double>(diag.inv_records);
    diag.inv_mean_distance /= static_cast<double>(diag.inv_records);
  }
  for (auto& tr : slots)
    if (tr.total) rep.per_task.push_back(std::move(tr));
  if (opts.diagnostics) rep.diagnostics = diag;
  return rep;
}

std::vector<TokenSeq> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions '" + path + "'");
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(split_tokens(line));
  }
  if (out.empty()) throw IoError("predictions file '" + path + "' is empty");
  return out;
}

EvalReport score_file(const std::string& dataset_path, const std::string& predictions_path,
                      const EvalOptions& opts) {
  const Manifest manifest = read_manifest(manifest_path(dataset_path));
  const auto records = read_dataset(dataset_path);
  const auto predictions = read_predictions(predictions_path);
  return evaluate(manifest, records, predictions, opts);
}

}  // namespace linseq
