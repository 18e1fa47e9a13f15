#include "linseq/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "linseq/dataset_io.hpp"
#include "linseq/error.hpp"
#include "linseq/linalg.hpp"
#include "parallel.hpp"

namespace linseq {

namespace {

// Salts for the secondary streams of one attempt.
constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ull;
constexpr std::uint64_t kPickSalt = 0x7461736bull;

struct TaskName {
  TaskKind kind;
  std::string_view name;
  std::string_view prefix;
};

constexpr TaskName kNames[] = {
    {TaskKind::Transpose, "transpose", "Transpose"},
    {TaskKind::Add, "add", "Add"},
    {TaskKind::Matvec, "matvec", "Dot"},
    {TaskKind::Matmul, "matmul", "Mul"},
    {TaskKind::Eigenvalues, "eigenvalues", "Eigval"},
    {TaskKind::Eigenvectors, "eigenvectors", "Eigvec"},
    {TaskKind::SingularValues, "singular_values", "Sing"},
    {TaskKind::Svd, "svd", "Svd"},
    {TaskKind::Invert, "invert", "Inv"},
};

bool two_operands(TaskKind t) {
  return t == TaskKind::Add || t == TaskKind::Matvec || t == TaskKind::Matmul;
}

bool uses_spectral(const EnsembleSpec& s) {
  if (std::holds_alternative<SpectralResample>(s.law) && s.mixture.empty()) return true;
  for (const auto& c : s.mixture)
    if (std::holds_alternative<SpectralResample>(c.law)) return true;
  return false;
}

Matrix column_of(const std::vector<double>& v) { return Matrix::column(v); }

std::vector<Matrix> draw_operands(const MatrixTask& task, const Shape& s, Rng& rng) {
  std::vector<Matrix> ops;
  ops.push_back(sample_matrix(task.input_spec, s.rows, s.cols, rng));
  if (task.kind == TaskKind::Add || task.kind == TaskKind::Matmul) {
    ops.push_back(sample_matrix(task.input_spec, s.rows, s.cols, rng));
  } else if (task.kind == TaskKind::Matvec) {
    EnsembleSpec vs = task.input_spec;
    vs.symmetric = false;
    ops.push_back(sample_matrix(vs, s.rows, 1, rng));
  }
  return ops;
}

Matrix concat(const std::vector<Matrix>& ops) {
  if (ops.size() == 1) return ops.front();
  return concat_operands(ops, Axis::Cols);
}

std::size_t input_token_count(const MatrixTask& task, const Shape& s) {
  const Shape in = input_shape(task.kind, s.rows, s.cols);
  return sequence_length(in.rows, in.cols, SequenceLayout{task.scheme_in, true}) +
         (task.prefix ? 1 : 0);
}

}  // namespace

std::string_view to_string(TaskKind t) {
  for (const auto& n : kNames)
    if (n.kind == t) return n.name;
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  for (const auto& n : kNames)
    if (n.name == name) return n.kind;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

std::string_view default_prefix(TaskKind t) {
  for (const auto& n : kNames)
    if (n.kind == t) return n.prefix;
  return "?";
}

bool requires_symmetric(TaskKind t) {
  return t == TaskKind::Eigenvalues || t == TaskKind::Eigenvectors;
}

bool requires_square(TaskKind t) { return requires_symmetric(t) || t == TaskKind::Invert; }

Shape input_shape(TaskKind t, std::size_t m, std::size_t n) {
  switch (t) {
    case TaskKind::Add:
    case TaskKind::Matmul: return {m, 2 * n};
    case TaskKind::Matvec: return {m, n + 1};
    default: return {m, n};
  }
}

Shape output_shape(TaskKind t, std::size_t m, std::size_t n) {
  switch (t) {
    case TaskKind::Transpose: return {n, m};
    case TaskKind::Add: return {m, n};
    case TaskKind::Matvec: return {n, 1};
    case TaskKind::Matmul: return {n, n};
    case TaskKind::Eigenvalues: return {n, 1};
    case TaskKind::Eigenvectors: return {n + 1, n};
    case TaskKind::SingularValues: return {std::min(m, n), 1};
    case TaskKind::Svd: return {m + n + 1, std::min(m, n)};
    case TaskKind::Invert: return {n, n};
  }
  return {0, 0};
}

Matrix compute_target(TaskKind t, std::span<const Matrix> ops) {
  const std::size_t want = two_operands(t) ? 2 : 1;
  if (ops.size() != want) throw ShapeError("wrong operand count for " + std::string(to_string(t)));
  const Matrix& a = ops[0];
  switch (t) {
    case TaskKind::Transpose: return transpose(a);
    case TaskKind::Add: return add(a, ops[1]);
    case TaskKind::Matvec: return matvec(transpose(a), ops[1]);
    case TaskKind::Matmul: return matmul(transpose(a), ops[1]);
    case TaskKind::Eigenvalues: return column_of(sym_eigenvalues(a));
    case TaskKind::Eigenvectors: {
      const EigenResult e = sym_eigen(a);
      return stack_eigen_output(e.values, e.vectors);
    }
    case TaskKind::SingularValues: return column_of(singular_values(a));
    case TaskKind::Svd: {
      const SvdResult r = svd(a);
      return stack_svd_output(r.singular, r.u, r.v);
    }
    case TaskKind::Invert: return invert(a);
  }
  throw std::invalid_argument("unknown task");
}

std::vector<Matrix> split_input(TaskKind t, const Matrix& input) {
  if (!two_operands(t)) return {input};
  const std::size_t m = input.rows();
  std::size_t n = 0;
  if (t == TaskKind::Matvec) {
    if (input.cols() < 2) throw ShapeError("matvec input needs at least 2 columns");
    n = input.cols() - 1;
  } else {
    if (input.cols() % 2 != 0) throw ShapeError("operand pair needs an even column count");
    n = input.cols() / 2;
  }
  Matrix a(m, n);
  Matrix b(m, input.cols() - n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = input(i, j);
    for (std::size_t j = n; j < input.cols(); ++j) b(i, j - n) = input(i, j);
  }
  return {a, b};
}

MatrixTask MatrixTask::make(TaskKind kind, DimRange dims) {
  MatrixTask t;
  t.kind = kind;
  t.input_spec.law = IidUniform{10.0};
  t.input_spec.dims = dims;
  t.input_spec.symmetric = requires_symmetric(kind) || kind == TaskKind::Svd;
  if (requires_square(kind) || t.input_spec.symmetric) t.input_spec.dims.square = true;
  return t;
}

void MatrixTask::validate() const {
  input_spec.validate();
  scheme_in.validate();
  scheme_out.validate();
  const bool square = input_spec.dims.square ||
                      (input_spec.dims.is_fixed() && input_spec.dims.min_rows == input_spec.dims.min_cols);
  if (requires_symmetric(kind) && !input_spec.symmetric)
    throw std::invalid_argument(std::string(to_string(kind)) + " needs a symmetric input ensemble");
  if (requires_square(kind) && !square)
    throw std::invalid_argument(std::string(to_string(kind)) + " needs square inputs");
  if (kind == TaskKind::Matvec && uses_spectral(input_spec))
    throw std::invalid_argument("matvec cannot draw its vector from a spectral law");
  if (!(noise_level >= 0)) throw std::invalid_argument("noise level must be >= 0");
  if (max_condition && !(*max_condition >= 1))
    throw std::invalid_argument("condition cap must be >= 1");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (prefix && (prefix->empty() || prefix->find_first_of(" \t\n") != std::string::npos))
    throw std::invalid_argument("prefix must be a single token");
}

ExampleRecord make_example(const MatrixTask& task, std::size_t index, std::uint64_t global_seed) {
  task.validate();
  const std::uint64_t base = derive_seed(global_seed, index);
  const double coeff_std = task.noise_level > 0 ? task.input_spec.coefficient_std() : 0.0;
  const SequenceLayout in_layout{task.scheme_in, true};
  const SequenceLayout out_layout{task.scheme_out, true};

  for (int attempt = 0; attempt < task.max_attempts; ++attempt) {
    const std::uint64_t seed = derive_seed(base, static_cast<std::uint64_t>(attempt));
    Rng rng(seed);
    const Shape shape = draw_shape(task.input_spec, rng);
    if (task.max_input_tokens && input_token_count(task, shape) > task.max_input_tokens) continue;

    ExampleRecord r;
    try {
      std::vector<Matrix> ops = draw_operands(task, shape, rng);
      for (auto& op : ops) op = round_matrix(op, task.scheme_in.precision_digits);
      Matrix target = compute_target(task.kind, ops);
      if (task.kind == TaskKind::Invert && task.max_condition &&
          condition_number(ops[0]) > *task.max_condition)
        continue;

      Matrix input = concat(ops);
      if (task.noise_level > 0) {
        std::vector<Matrix> noisy;
        for (std::size_t j = 0; j < ops.size(); ++j) {
          const Matrix e = add_noise(ops[j], task.noise_level, coeff_std,
                                     derive_seed(seed ^ kNoiseSalt, j));
          noisy.push_back(round_matrix(e, task.scheme_in.precision_digits));
        }
        if (task.noisy_target) target = compute_target(task.kind, noisy);
        r.input_tokens = matrix_to_tokens(concat(noisy), in_layout);
      } else {
        r.input_tokens = matrix_to_tokens(input, in_layout);
      }
      r.target = round_matrix(target, task.scheme_out.precision_digits);
      r.output_tokens = matrix_to_tokens(r.target, out_layout);
      r.clean_input = std::move(input);
    } catch (const Singular&) {
      continue;
    } catch (const NoConvergence&) {
      continue;
    } catch (const OverflowError&) {
      continue;
    } catch (const RangeError&) {
      continue;
    }

    r.task = task.kind;
    r.index = index;
    r.seed = seed;
    r.m = shape.rows;
    r.n = shape.cols;
    if (task.prefix) {
      r.prefix = task.prefix;
      r.input_tokens.insert(r.input_tokens.begin(), *task.prefix);
      r.output_tokens.insert(r.output_tokens.begin(), *task.prefix);
    }
    return r;
  }
  throw ResampleExhausted(std::string(to_string(task.kind)) + " example " + std::to_string(index) +
                          ": no valid draw in " + std::to_string(task.max_attempts) + " attempts");
}

namespace {

std::vector<WeightedTask> prepare_joint(const std::vector<WeightedTask>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("joint dataset needs at least one task");
  std::vector<WeightedTask> out = tasks;
  std::set<std::string> seen;
  double total = 0.0;
  for (auto& wt : out) {
    if (!wt.task.prefix) wt.task.prefix = std::string(default_prefix(wt.task.kind));
    if (!seen.insert(*wt.task.prefix).second)
      throw std::invalid_argument("duplicate task prefix '" + *wt.task.prefix + "'");
    if (!(wt.weight >= 0)) throw std::invalid_argument("task weights must be >= 0");
    if (!(wt.task.scheme_in == out.front().task.scheme_in) ||
        !(wt.task.scheme_out == out.front().task.scheme_out))
      throw std::invalid_argument("joint tasks must share their encoding schemes");
    wt.task.validate();
    total += wt.weight;
  }
  if (!(total > 0)) throw std::invalid_argument("task weights sum to zero");
  return out;
}

std::size_t pick_task(const std::vector<WeightedTask>& tasks, std::size_t index,
                      std::uint64_t global_seed) {
  double total = 0.0;
  for (const auto& t : tasks) total += t.weight;
  Rng rng(splitmix64(derive_seed(global_seed, index) ^ kPickSalt));
  double u = rng.uniform01() * total;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (u < tasks[k].weight) return k;
    u -= tasks[k].weight;
  }
  return tasks.size() - 1;
}

ExampleRecord joint_example(const std::vector<WeightedTask>& tasks, std::size_t index,
                            std::uint64_t global_seed) {
  return make_example(tasks[pick_task(tasks, index, global_seed)].task, index, global_seed);
}

template <class Make>
void write_records(const std::string& path, std::size_t count, const GenerateOptions& opts,
                   const std::string& manifest, Make&& make) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
  std::vector<std::string> lines;
  for (std::size_t start = 0; start < count; start += chunk) {
    const std::size_t end = std::min(count, start + chunk);
    lines.assign(end - start, {});
    detail::parallel_for(start, end, opts.threads, [&](std::size_t i) {
      lines[i - start] = record_to_json(make(i), opts.include_values);
    });
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError("write failed on '" + path + "'");
  }
  out.close();
  if (!out) throw IoError("write failed on '" + path + "'");

  std::ofstream mf(manifest_path(path), std::ios::binary | std::ios::trunc);
  if (!mf) throw IoError("cannot open '" + manifest_path(path) + "' for writing");
  mf << manifest << '\n';
  if (!mf) throw IoError("write failed on '" + manifest_path(path) + "'");
}

}  // namespace

void write_dataset(const MatrixTask& task, std::size_t count, std::uint64_t global_seed,
                   const std::string& path, const GenerateOptions& opts) {
  task.validate();
  const std::string manifest = manifest_json({WeightedTask{task, 1.0}}, false, count, global_seed);
  write_records(path, count, opts, manifest,
                [&](std::size_t i) { return make_example(task, i, global_seed); });
}

void make_joint_dataset(const std::vector<WeightedTask>& tasks, std::size_t count,
                        std::uint64_t global_seed, const std::string& path,
                        const GenerateOptions& opts) {
  const auto prepared = prepare_joint(tasks);
  const std::string manifest = manifest_json(prepared, true, count, global_seed);
  write_records(path, count, opts, manifest,
                [&](std::size_t i) { return joint_example(prepared, i, global_seed); });
}

std::vector<ExampleRecord> generate(const MatrixTask& task, std::size_t count,
                                    std::uint64_t global_seed, unsigned threads) {
  task.validate();
  std::vector<ExampleRecord> out(count);
  detail::parallel_for(0, count, threads,
                       [&](std::size_t i) { out[i] = make_example(task, i, global_seed); });
  return out;
}

std::vector<ExampleRecord> generate_joint(const std::vector<WeightedTask>& tasks, std::size_t count,
                                          std::uint64_t global_seed, unsigned threads) {
  const auto prepared = prepare_joint(tasks);
  std::vector<ExampleRecord> out(count);
  detail::parallel_for(0, count, threads,
                       [&](std::size_t i) { out[i] = joint_example(prepared, i, global_seed); });
  return out;
}

OodSuite ood_suite() {
  constexpr double kBaseWidth = 10.0;
  const double eig_std = wigner_eig_std(kBaseWidth, 5);  // 12.91

  auto base = [] {
    EnsembleSpec s;
    s.symmetric = true;
    s.dims = DimRange::fixed(5, 5);
    return s;
  };
  auto spectral = [&](EigFamily f, double scale) {
    return CoefficientLaw{SpectralResample{EigDist{f, scale}}};
  };
  auto single = [&](CoefficientLaw law) {
    EnsembleSpec s = base();
    s.law = std::move(law);
    return s;
  };
  auto mix = [&](std::vector<CoefficientLaw> laws) {
    EnsembleSpec s = base();
    for (auto& l : laws) s.mixture.push_back(WeightedLaw{1.0, std::move(l)});
    return s;
  };
  const CoefficientLaw wigner = IidUniform{kBaseWidth};

  OodSuite suite;
  suite.train = {
      {"wigner_a10", single(wigner)},
      {"wigner_a1_100", single(UniformWidthMixture{1.0, 100.0})},
      {"wigner_positive", mix({wigner, spectral(EigFamily::Positive, eig_std)})},
      {"wigner_gaussian", mix({wigner, spectral(EigFamily::Gaussian, eig_std)})},
      {"wigner_laplace", mix({wigner, spectral(EigFamily::Laplace, eig_std)})},
      {"laplace", single(spectral(EigFamily::Laplace, eig_std))},
      {"gaussian_uniform_laplace",
       mix({spectral(EigFamily::Gaussian, eig_std), spectral(EigFamily::Uniform, eig_std),
            spectral(EigFamily::Laplace, eig_std)})},
  };
  for (double r : {0.3, 1.0, 1.2}) {
    char name[32];
    std::snprintf(name, sizeof name, "wigner_%.1f", r);
    suite.test.push_back({name, single(IidUniform{kBaseWidth * r})});
  }
  for (EigFamily f :
       {EigFamily::Positive, EigFamily::Uniform, EigFamily::Gaussian, EigFamily::Laplace}) {
    for (double r : {0.6, 1.0}) {
      char name[32];
      std::snprintf(name, sizeof name, "%s_%.1f", std::string(to_string(f)).c_str(), r);
      suite.test.push_back({name, single(spectral(f, eig_std * r))});
    }
  }
  return suite;
}

}  // namespace linseq
