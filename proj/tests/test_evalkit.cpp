#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "linseq/dataset_io.hpp"
#include "linseq/error.hpp"
#include "linseq/evalkit.hpp"
#include "linseq/linalg.hpp"
#include "linseq/matseq.hpp"
#include "linseq/taskgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace linseq;
using linseq::testing::spit;
using linseq::testing::TempDir;

namespace {

TaskContext context_of(const ExampleRecord& r, const EncodingScheme& out) {
  TaskContext c;
  c.task = r.task;
  c.m = r.m;
  c.n = r.n;
  c.input = r.clean_input;
  c.target = r.target;
  c.scheme_out = out;
  c.prefix = r.prefix;
  return c;
}

std::string predictions_of(const std::vector<ExampleRecord>& recs) {
  std::string s;
  for (const auto& r : recs) s += join_tokens(r.output_tokens) + "\n";
  return s;
}

}  // namespace

TEST(Norms, RelErrorExamples) {
  EXPECT_NEAR(rel_error(Matrix(1, 1, 1.03), Matrix(1, 1, 1.0), Norm::L1), 0.03, 1e-12);
  const Matrix o(2, 2, 1.0);
  Matrix p = o;
  p(1, 0) = 1.5;
  EXPECT_NEAR(rel_error(p, o, Norm::L1), 0.125, 1e-15);
  EXPECT_NEAR(rel_error(p, o, Norm::L2), 0.0625, 1e-15);  // squared norms
  EXPECT_NEAR(rel_error(p, o, Norm::Linf), 0.5, 1e-15);
  EXPECT_EQ(rel_error(Matrix(2, 2), Matrix(2, 2), Norm::L1), 0.0);
  EXPECT_TRUE(std::isinf(rel_error(p, Matrix(2, 2), Norm::L1)));
  EXPECT_THROW(rel_error(Matrix(2, 3), o, Norm::L1), ShapeError);
  EXPECT_EQ(matrix_norm(Matrix::from_rows({{3, -4}}), Norm::L2), 25.0);
  EXPECT_EQ(parse_norm("LINF"), Norm::Linf);
  EXPECT_THROW(parse_norm("l3"), std::invalid_argument);
}

TEST(Norms, ToleranceBoundary) {
  EXPECT_TRUE(within_tolerance(0.0, 0.0));
  EXPECT_FALSE(within_tolerance(0.005, 0.005));
  EXPECT_TRUE(within_tolerance(0.0049, 0.005));
}

TEST(Verdicts, GenericTask) {
  const ExampleRecord r = make_example(MatrixTask::make(TaskKind::Transpose), 0, 3);
  const TaskContext c = context_of(r, EncodingScheme::p10());
  EXPECT_EQ(check_prediction(c, r.output_tokens, 0.0, Norm::L1), Verdict::Correct);
  TokenSeq bad = r.output_tokens;
  bad.pop_back();
  EXPECT_EQ(check_prediction(c, bad, 0.05, Norm::L1), Verdict::IllFormed);
  TokenSeq extra = r.output_tokens;
  extra.push_back("+");
  EXPECT_EQ(check_prediction(c, extra, 0.05, Norm::L1), Verdict::IllFormed);
  TokenSeq prefixed = r.output_tokens;
  prefixed.insert(prefixed.begin(), "Transpose");
  EXPECT_EQ(check_prediction(c, prefixed, 0.05, Norm::L1), Verdict::IllFormed);
  // right values, wrong shape
  const TokenSeq flat = matrix_to_tokens(Matrix(1, 25, 1.0), {EncodingScheme::p10(), true});
  EXPECT_EQ(check_prediction(c, flat, 0.05, Norm::L1), Verdict::IllFormed);
  // a far-off matrix of the right shape is merely incorrect
  const TokenSeq zeros = matrix_to_tokens(Matrix(5, 5, 1.0), {EncodingScheme::p10(), true});
  EXPECT_EQ(check_prediction(c, zeros, 0.05, Norm::L1), Verdict::Incorrect);
  EXPECT_FALSE(score_prediction(c, bad, Norm::L1));
  EXPECT_EQ(*score_prediction(c, r.output_tokens, Norm::L1), 0.0);
}

TEST(Verdicts, PrefixRequired) {
  const auto recs = generate_joint({{MatrixTask::make(TaskKind::Add), 1.0}}, 1, 3, 1);
  const TaskContext c = context_of(recs[0], EncodingScheme::p10());
  EXPECT_EQ(check_prediction(c, recs[0].output_tokens, 0.0, Norm::L1), Verdict::Correct);
  const TokenSeq stripped(recs[0].output_tokens.begin() + 1, recs[0].output_tokens.end());
  EXPECT_EQ(check_prediction(c, stripped, 0.05, Norm::L1), Verdict::IllFormed);
  TokenSeq wrong = recs[0].output_tokens;
  wrong[0] = "Mul";
  EXPECT_EQ(check_prediction(c, wrong, 0.05, Norm::L1), Verdict::IllFormed);
}

TEST(Verdicts, DecompositionsUsePredictedFactors) {
  MatrixTask t = MatrixTask::make(TaskKind::Eigenvectors);
  const ExampleRecord r = make_example(t, 0, 4);
  const TaskContext c = context_of(r, EncodingScheme::p10());
  const double err = prediction_error(c, r.target, Norm::L1);
  EXPECT_LT(err, 0.05);
  EXPECT_GT(err, 0.0);  // rounding of Q and D leaves a residual
  // independent recomputation of the reconstruction error
  const EigenParts p = split_eigen_output(r.target);
  const Matrix d = Matrix::diagonal(p.values);
  const Matrix qiq = oracle::naive_product(oracle::naive_product(p.q, r.clean_input), oracle::naive_transpose(p.q));
  EXPECT_NEAR(err, oracle::l1_diff(qiq, d) / oracle::l1(d), 1e-12);

  // swapping two eigenvector rows without their eigenvalues breaks it
  Matrix swapped = r.target;
  for (std::size_t j = 0; j < 5; ++j) std::swap(swapped(1, j), swapped(2, j));
  EXPECT_GT(prediction_error(c, swapped, Norm::L1), 0.05);

  MatrixTask s = MatrixTask::make(TaskKind::Svd);
  const ExampleRecord rs = make_example(s, 0, 4);
  const TaskContext cs = context_of(rs, EncodingScheme::p10());
  EXPECT_LT(prediction_error(cs, rs.target, Norm::L1), 0.05);
  EXPECT_EQ(check_prediction(cs, rs.output_tokens, 0.05, Norm::L1), Verdict::Correct);
}

TEST(Verdicts, InverseNormalization) {
  const Matrix a = Matrix::from_rows({{4, 7}, {2, 6}});
  TaskContext c;
  c.task = TaskKind::Invert;
  c.m = c.n = 2;
  c.input = a;
  c.target = invert(a);
  Matrix p = c.target;
  p(0, 0) += 0.01;  // PI - Id = [[0.04, 0.07], [0, 0]]
  EXPECT_NEAR(prediction_error(c, p, Norm::L1), 0.11 / 2, 1e-12);
  EXPECT_NEAR(prediction_error(c, p, Norm::L1, CheckOptions{true}), 0.11, 1e-12);
  EXPECT_NEAR(prediction_error(c, p, Norm::Linf), 0.07, 1e-12);

  // the rounded reference inverse of an ill-conditioned input
  c.input = Matrix::from_rows({{1, 2}, {1.001, 2}});
  c.target = round_matrix(invert(c.input), 3);
  EXPECT_EQ(prediction_error(c, c.target, Norm::L1), 0.0);
  EXPECT_GT(prediction_error(c, c.target, Norm::L1, CheckOptions{true}), 0.05);
  Matrix off = c.target;
  off(0, 0) *= 1.001;
  EXPECT_GT(prediction_error(c, off, Norm::L1), 0.05);
}

TEST(Diagnostics, Eigvec) {
  Matrix m = Matrix::from_rows({{2, 1, 0}, {1, 3, 1}, {0, 1, 4}});
  const EigenResult e = sym_eigen(m);
  const Matrix exact = stack_eigen_output(e.values, e.vectors);
  const EigvecDiagnostics d = eigvec_diagnostics(m, exact);
  EXPECT_NEAR(d.condition, 1.0, 1e-9);
  EXPECT_NEAR(d.eigenvalue_error, 0.0, 1e-12);
  for (double x : d.column_norms) EXPECT_NEAR(x, 1.0, 1e-12);
  for (double x : d.successive_dots) EXPECT_NEAR(x, 0.0, 1e-12);
  EXPECT_EQ(classify_orthogonality(d.condition), Orthogonality::Orthogonal);

  // scaling one column of H = Q^T (one row of Q) by 1.1 gives cond(H) = 1.1
  Matrix scaled = exact;
  for (std::size_t j = 0; j < 3; ++j) scaled(2, j) *= 1.1;  // row 0 holds the values
  const EigvecDiagnostics ds = eigvec_diagnostics(m, scaled);
  EXPECT_NEAR(ds.condition, 1.1, 1e-9);
  EXPECT_NEAR(ds.column_norms[1], 1.1, 1e-12);
  EXPECT_EQ(classify_orthogonality(ds.condition), Orthogonality::NotOrthogonal);
  EXPECT_EQ(classify_orthogonality(1.037), Orthogonality::Between);
  EXPECT_EQ(classify_orthogonality(1.0349), Orthogonality::Orthogonal);
}

TEST(Diagnostics, Inverse) {
  const Matrix a = Matrix::from_rows({{4, 7}, {2, 6}});
  const Matrix inv = invert(a);
  Matrix p = inv;
  for (double& x : p.data()) x *= 1.001;
  const InverseDiagnostics d = inverse_diagnostics(a, p);
  EXPECT_NEAR(d.distance, 1e-3, 1e-12);
  EXPECT_NEAR(d.product_residual, 1e-3, 1e-12);  // ||1e-3 Id||_1 / 2
  EXPECT_NEAR(d.condition, condition_number(a), 1e-12);
  EXPECT_THROW(inverse_diagnostics(Matrix::from_rows({{1, 2}, {2, 4}}), p), Singular);
}

TEST(Files, SelfScoreAndErrors) {
  TempDir dir;
  MatrixTask t = MatrixTask::make(TaskKind::Matmul);
  t.scheme_in = t.scheme_out = EncodingScheme::p1000();
  write_dataset(t, 50, 2, dir.file("d.jsonl"));
  const auto recs = generate(t, 50, 2, 1);
  spit(dir.file("p.txt"), predictions_of(recs));
  const EvalReport rep = score_file(dir.file("d.jsonl"), dir.file("p.txt"));
  EXPECT_EQ(rep.total, 50u);
  EXPECT_EQ(rep.well_formed, 50u);
  for (std::size_t k = 0; k < rep.accuracy.tolerances.size(); ++k)
    for (std::size_t j = 0; j < rep.accuracy.norms.size(); ++j) EXPECT_EQ(rep.rate(k, j), 1.0);

  std::ostringstream csv;
  rep.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "scope,tolerance,l1,l2,linf");
  std::ostringstream table;
  rep.write_table(table);
  EXPECT_FALSE(table.str().empty());

  spit(dir.file("short.txt"), predictions_of({recs.begin(), recs.begin() + 49}));
  EXPECT_THROW(score_file(dir.file("d.jsonl"), dir.file("short.txt")), IoError);
  spit(dir.file("empty.txt"), "");
  EXPECT_THROW(score_file(dir.file("d.jsonl"), dir.file("empty.txt")), IoError);
  EXPECT_THROW(score_file(dir.file("d.jsonl"), dir.file("missing.txt")), IoError);
}

TEST(Files, GarbageLinesAreIllFormed) {
  TempDir dir;
  MatrixTask t = MatrixTask::make(TaskKind::Transpose);
  write_dataset(t, 4, 2, dir.file("d.jsonl"));
  const auto recs = generate(t, 4, 2, 1);
  std::string preds = predictions_of({recs.begin(), recs.begin() + 2});
  preds += "\nV5 V5 hello\n";
  spit(dir.file("p.txt"), preds);
  const EvalReport rep = score_file(dir.file("d.jsonl"), dir.file("p.txt"));
  EXPECT_EQ(rep.total, 4u);
  EXPECT_EQ(rep.well_formed, 2u);
  EXPECT_DOUBLE_EQ(rep.rate(0, 0), 0.5);
}

TEST(Files, MonotoneInTolerance) {
  TempDir dir;
  MatrixTask t = MatrixTask::make(TaskKind::Eigenvalues);
  write_dataset(t, 200, 5, dir.file("d.jsonl"));
  // perturbed predictions: scale every value by a record-dependent factor
  std::string preds;
  for (const auto& r : generate(t, 200, 5, 1)) {
    Matrix p = r.target;
    const double f = 1.0 + 0.0005 * static_cast<double>(r.index % 120);
    for (double& x : p.data()) x *= f;
    preds += join_tokens(matrix_to_tokens(p, {t.scheme_out, true})) + "\n";
  }
  spit(dir.file("p.txt"), preds);
  EvalOptions o;
  o.tolerances = {0.0, 0.005, 0.01, 0.02, 0.05, 0.1};
  const EvalReport rep = score_file(dir.file("d.jsonl"), dir.file("p.txt"), o);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 1; k < o.tolerances.size(); ++k)
      EXPECT_GE(rep.rate(k, j), rep.rate(k - 1, j));
    // L2 squares the error, so only the exact tolerance separates it here
    EXPECT_LT(rep.rate(j == 1 ? 0 : 1, j), 1.0);
    EXPECT_EQ(rep.rate(5, j), 1.0);
  }
}

TEST(Files, JointReportAndDiagnostics) {
  TempDir dir;
  const std::vector<WeightedTask> tasks{{MatrixTask::make(TaskKind::Eigenvectors), 1.0},
                                        {MatrixTask::make(TaskKind::Invert), 1.0}};
  make_joint_dataset(tasks, 100, 8, dir.file("j.jsonl"));
  spit(dir.file("p.txt"), predictions_of(generate_joint(tasks, 100, 8, 1)));
  EvalOptions o;
  o.diagnostics = true;
  const EvalReport rep = score_file(dir.file("j.jsonl"), dir.file("p.txt"), o);
  ASSERT_EQ(rep.per_task.size(), 2u);
  EXPECT_EQ(rep.per_task[0].total + rep.per_task[1].total, 100u);
  ASSERT_TRUE(rep.diagnostics);
  const DiagnosticsSummary& d = *rep.diagnostics;
  EXPECT_EQ(d.eig_records, rep.per_task[0].total);
  EXPECT_EQ(d.inv_records, rep.per_task[1].total);
  std::size_t eig_sum = 0;
  for (auto& row : d.eig_buckets)
    for (auto c : row) eig_sum += c;
  EXPECT_EQ(eig_sum, d.eig_records);
  // reference eigenvectors rounded to 3 digits stay orthogonal
  EXPECT_EQ(d.eig_buckets[1][0], d.eig_records);
  std::ostringstream csv;
  rep.write_csv(csv);
  EXPECT_NE(csv.str().find("\neigenvectors,"), std::string::npos);
  EXPECT_NE(csv.str().find("\ninvert,"), std::string::npos);
}
