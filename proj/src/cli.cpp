#include "linseq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "linseq/dataset_io.hpp"
#include "linseq/error.hpp"
#include "linseq/evalkit.hpp"
#include "linseq/numcodec.hpp"
#include "linseq/paramcount.hpp"
#include "linseq/taskgen.hpp"

namespace linseq::cli {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    if (end > start) out.emplace_back(s.substr(start, end - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(kSeedEnv) + " is not an integer");
    }
  }
  return 0;
}

CoefficientLaw parse_law(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw std::invalid_argument("empty ensemble component");
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i) -> const std::string& {
    if (parts.size() <= i)
      throw std::invalid_argument("ensemble component '" + std::string(text) + "' needs more fields");
    return parts[i];
  };
  if (kind == "uniform") return IidUniform{parts.size() > 1 ? to_double(arg(1)) : 10.0};
  if (kind == "gaussian") return IidGaussian{to_double(arg(1))};
  if (kind == "laplace") return IidLaplace{to_double(arg(1))};
  if (kind == "width") {
    const auto r = split(arg(1), '-');
    if (r.size() != 2) throw std::invalid_argument("width needs A1-A2");
    return UniformWidthMixture{to_double(r[0]), to_double(r[1])};
  }
  if (kind == "spectral")
    return SpectralResample{EigDist{parse_eig_family(arg(1)), to_double(arg(2))}};
  throw std::invalid_argument("unknown coefficient law '" + kind + "'");
}

std::vector<std::string> parse_list(const std::string& s) { return split(s, ','); }

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : parse_list(s)) out.push_back(to_double(p));
  return out;
}

// --------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string tasks = "transpose";
  std::string weights;
  std::string scheme = "p10";
  std::string scheme_in;
  std::string scheme_out;
  std::string dims = "5x5";
  std::string ensemble;
  std::size_t count = 10000;
  std::optional<std::uint64_t> seed;
  double noise = 0.0;
  bool noisy_target = false;
  std::optional<bool> symmetric;
  std::optional<double> max_cond;
  std::size_t max_tokens = 0;
  bool joint = false;
  bool no_values = false;
  unsigned threads = 0;
  std::string out;
};

int do_gen(const GenArgs& a, std::ostream& out) {
  const auto names = parse_list(a.tasks);
  if (names.empty()) throw std::invalid_argument("--task is empty");
  std::vector<double> weights(names.size(), 1.0);
  if (!a.weights.empty()) {
    weights = parse_doubles(a.weights);
    if (weights.size() != names.size())
      throw std::invalid_argument("--weights needs one value per task");
  }
  const DimRange dims = DimRange::parse(a.dims);
  const auto sin = EncodingScheme::parse(a.scheme_in.empty() ? a.scheme : a.scheme_in);
  const auto sout = EncodingScheme::parse(a.scheme_out.empty() ? a.scheme : a.scheme_out);

  std::vector<WeightedTask> tasks;
  for (std::size_t i = 0; i < names.size(); ++i) {
    MatrixTask t = MatrixTask::make(parse_task_kind(names[i]), dims);
    if (!a.ensemble.empty()) {
      const bool sym = t.input_spec.symmetric;
      const DimRange d = t.input_spec.dims;
      t.input_spec = parse_ensemble(a.ensemble);
      t.input_spec.symmetric = sym || t.input_spec.symmetric;
      t.input_spec.dims = d;
    }
    if (a.symmetric) t.input_spec.symmetric = *a.symmetric;
    if (t.input_spec.symmetric) t.input_spec.dims.square = true;
    t.scheme_in = sin;
    t.scheme_out = sout;
    t.noise_level = a.noise;
    t.noisy_target = a.noisy_target;
    t.max_condition = a.max_cond;
    t.max_input_tokens = a.max_tokens;
    tasks.push_back({t, weights[i]});
  }
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  GenerateOptions opts;
  opts.threads = a.threads;
  opts.include_values = !a.no_values;
  if (tasks.size() > 1 || a.joint)
    make_joint_dataset(tasks, a.count, seed, a.out, opts);
  else
    write_dataset(tasks.front().task, a.count, seed, a.out, opts);
  out << "wrote " << a.count << " records to " << a.out << " (seed " << seed << ")\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string dataset;
  std::string pred;
  std::string tol = "0.5,1,2,5";
  std::string norm = "l1,l2,linf";
  bool diagnostics = false;
  double diag_tol = 5.0;
  bool strict_inverse = false;
  std::string csv;
  unsigned threads = 0;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  EvalOptions opts;
  opts.tolerances.clear();
  for (double t : parse_doubles(a.tol)) {
    if (t < 0) throw std::invalid_argument("tolerances must be >= 0");
    opts.tolerances.push_back(t / 100.0);
  }
  opts.norms.clear();
  for (const auto& n : parse_list(a.norm)) opts.norms.push_back(parse_norm(n));
  opts.diagnostics = a.diagnostics;
  opts.diagnostic_tolerance = a.diag_tol / 100.0;
  opts.check.strict_inverse = a.strict_inverse;
  opts.threads = a.threads;
  const EvalReport rep = score_file(a.dataset, a.pred, opts);
  rep.write_table(out);
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + a.csv + "' for writing");
    rep.write_csv(f);
    if (!f) throw IoError("write failed on '" + a.csv + "'");
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string ens = "wigner";
  std::string laws = "uniform";
  double A = 10.0;
  std::string n = "5,10,15,20";
  std::size_t samples = 100000;
  std::size_t bins = 50;
  std::optional<std::uint64_t> seed;
  std::string hist_dir;
  double tol = 0.01;
  bool check = false;
  unsigned threads = 0;
};

int do_stats(const StatsArgs& a, std::ostream& out) {
  if (a.ens != "wigner") throw std::invalid_argument("only --ens wigner is supported");
  if (a.samples == 0) throw std::invalid_argument("--samples must be >= 1");
  const double coeff_std = a.A / std::sqrt(3.0);
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  if (!a.hist_dir.empty()) std::filesystem::create_directories(a.hist_dir);

  char line[160];
  std::snprintf(line, sizeof line, "%-9s %4s %10s %10s %9s %9s %8s  %s\n", "law", "n", "expected",
                "empirical", "diff", "std_err", "ks", "within");
  out << line;
  bool all_ok = true;
  for (const auto& law_name : parse_list(a.laws)) {
    CoefficientLaw law;
    if (law_name == "uniform") law = IidUniform{a.A};
    else if (law_name == "gaussian") law = IidGaussian{coeff_std};
    else if (law_name == "laplace") law = IidLaplace{coeff_std};
    else throw std::invalid_argument("unknown coefficient law '" + law_name + "'");
    for (const auto& ns : parse_list(a.n)) {
      const auto n = static_cast<std::size_t>(std::stoul(ns));
      EnsembleSpec spec;
      spec.law = law;
      spec.symmetric = true;
      spec.dims = DimRange::fixed(n, n);
      const EigHistogram h = eig_histogram(spec, a.samples, a.bins, seed, a.threads);
      const double expected = wigner_eig_std(a.A, n);
      const double diff = h.stddev - expected;
      const bool ok = std::fabs(diff) <= a.tol;
      all_ok = all_ok && ok;
      std::snprintf(line, sizeof line, "%-9s %4zu %10.4f %10.4f %+9.4f %9.4f %8.5f  %s\n",
                    law_name.c_str(), n, expected, h.stddev, diff, h.stddev_error,
                    h.semicircle_ks, ok ? "yes" : "no");
      out << line;
      if (!a.hist_dir.empty()) {
        const auto path = std::filesystem::path(a.hist_dir) /
                          ("wigner_" + law_name + "_n" + std::to_string(n) + ".csv");
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
        h.histogram.write_csv(f);
      }
    }
  }
  return a.check && !all_ok ? kExitRuntime : kExitOk;
}

// --------------------------------------------------------------------------
// vocab

struct VocabArgs {
  std::string scheme = "p10";
  std::size_t max_dim = 30;
  std::string tasks;
  std::string out;
};

int do_vocab(const VocabArgs& a, std::ostream& out) {
  const auto s = EncodingScheme::parse(a.scheme);
  std::vector<std::string> extra;
  for (const auto& t : parse_list(a.tasks)) {
    try {
      extra.emplace_back(default_prefix(parse_task_kind(t)));
    } catch (const std::invalid_argument&) {
      extra.push_back(t);  // a literal task token
    }
  }
  const Vocabulary v = build_vocabulary(s, a.max_dim, extra);
  if (a.out.empty()) {
    v.write(out);
    return kExitOk;
  }
  std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + a.out + "' for writing");
  v.write(f);
  if (!f) throw IoError("write failed on '" + a.out + "'");
  char fp[24];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(v.fingerprint()));
  out << s.name() << ": " << v.size() << " tokens (" << number_tokens(s).size()
      << " number tokens), fingerprint " << fp << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------------
// paramcount

struct ParamArgs {
  std::string layers = "1/1";
  std::uint64_t dim = 512;
  std::optional<std::uint64_t> dim_enc, dim_dec;
  std::optional<std::uint64_t> wi, wo, wp;
  std::string scheme = "p10";
  std::string scheme_in, scheme_out;
  std::string task = "transpose";
  std::string dims = "5x5";
  std::size_t max_dim = 30;
};

int do_paramcount(const ParamArgs& a, std::ostream& out) {
  const auto l = split(a.layers, '/');
  if (l.size() != 2) throw std::invalid_argument("--layers needs <encoder>/<decoder>");
  TransformerShape s;
  s.n_e = std::stoull(l[0]);
  s.n_d = std::stoull(l[1]);
  s.d_e = a.dim_enc.value_or(a.dim);
  s.d_d = a.dim_dec.value_or(a.dim);

  MatrixTask t = MatrixTask::make(parse_task_kind(a.task), DimRange::parse(a.dims));
  t.scheme_in = EncodingScheme::parse(a.scheme_in.empty() ? a.scheme : a.scheme_in);
  t.scheme_out = EncodingScheme::parse(a.scheme_out.empty() ? a.scheme : a.scheme_out);
  const std::size_t max_dim = std::max(a.max_dim, vocabulary_max_dim({WeightedTask{t, 1.0}}));
  s.w_i = a.wi.value_or(build_vocabulary(t.scheme_in, max_dim).size());
  s.w_o = a.wo.value_or(build_vocabulary(t.scheme_out, max_dim).size());
  s.w_p = a.wp.value_or(longest_sequence(t));

  const ParamCount p = param_count(s);
  out << "n_e " << s.n_e << "  n_d " << s.n_d << "  d_e " << s.d_e << "  d_d " << s.d_d
      << "  w_i " << s.w_i << "  w_o " << s.w_o << "  w_p " << s.w_p << '\n'
      << "input embedding   " << p.input_embedding << '\n'
      << "output embedding  " << p.output_embedding << '\n'
      << "encoder           " << p.encoder << '\n'
      << "decoder           " << p.decoder << '\n'
      << "total             " << p.total << '\n';
  return kExitOk;
}

}  // namespace

EnsembleSpec parse_ensemble(std::string_view text) {
  if (text.substr(0, 4) == "ood:") {
    const std::string name(text.substr(4));
    const OodSuite suite = ood_suite();
    for (const auto* group : {&suite.train, &suite.test})
      for (const auto& e : *group)
        if (e.name == name) return e.spec;
    throw std::invalid_argument("unknown ood ensemble '" + name + "'");
  }
  const auto comps = split(text, '+');
  if (comps.empty()) throw std::invalid_argument("empty ensemble");
  EnsembleSpec spec;
  if (comps.size() == 1 && comps[0].find('@') == std::string::npos) {
    spec.law = parse_law(comps[0]);
    return spec;
  }
  for (const auto& c : comps) {
    const auto at = c.find('@');
    WeightedLaw w;
    w.law = parse_law(std::string_view(c).substr(0, at));
    if (at != std::string::npos) w.weight = to_double(c.substr(at + 1));
    spec.mixture.push_back(std::move(w));
  }
  return spec;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate, score and inspect linear algebra sequence datasets", "linseq"};
  app.set_version_flag("--version", std::string(LINSEQ_VERSION));
  app.require_subcommand(1);

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "write a dataset and its manifest");
  gen->add_option("--task", g.tasks, "task, or comma-separated tasks for a joint dataset")
      ->default_val(g.tasks);
  gen->add_option("--weights", g.weights, "comma-separated task weights (joint)");
  gen->add_option("--scheme", g.scheme, "encoding for input and output")->default_val(g.scheme);
  gen->add_option("--scheme-in", g.scheme_in, "input encoding");
  gen->add_option("--scheme-out", g.scheme_out, "output encoding");
  gen->add_option("--dims", g.dims, "5x5, 6x4, 5-15 or 5-15x5-15")->default_val(g.dims);
  gen->add_option("--ensemble", g.ensemble, "coefficient law, e.g. uniform:10 or ood:laplace");
  gen->add_option("--count", g.count, "number of records")->default_val(g.count);
  gen->add_option("--seed", g.seed, std::string("global seed (default $") + kSeedEnv + " or 0)");
  gen->add_option("--noise", g.noise, "noise std in units of the coefficient std")
      ->default_val(g.noise);
  gen->add_flag("--noisy-target", g.noisy_target, "compute targets from the noisy input");
  gen->add_flag("--symmetric,!--no-symmetric", g.symmetric, "override input symmetry");
  gen->add_option("--max-cond", g.max_cond, "invert: reject draws above this condition number");
  gen->add_option("--max-tokens", g.max_tokens, "reject inputs longer than this");
  gen->add_flag("--joint", g.joint, "prefix task tokens even for a single task");
  gen->add_flag("--no-values", g.no_values, "omit clean_input and target");
  gen->add_option("--threads", g.threads, "worker threads (0 = all cores)");
  gen->add_option("--out", g.out, "dataset path")->required();

  EvalArgs e;
  auto* ev = app.add_subcommand("eval", "score a predictions file against a dataset");
  ev->add_option("--dataset", e.dataset, "dataset path")->required();
  ev->add_option("--pred", e.pred, "predictions, one sequence per line")->required();
  ev->add_option("--tol", e.tol, "tolerances in percent")->default_val(e.tol);
  ev->add_option("--norm", e.norm, "l1, l2 (sum of squares), linf")->default_val(e.norm);
  ev->add_flag("--diagnostics", e.diagnostics, "eigenvector and inverse failure diagnostics");
  ev->add_option("--diag-tol", e.diag_tol, "diagnostics tolerance in percent")
      ->default_val(e.diag_tol);
  ev->add_flag("--strict-inverse", e.strict_inverse, "score inverses by the raw |PI - Id| residual, no reference exemption");
  ev->add_option("--csv", e.csv, "also write the accuracy table as CSV");
  ev->add_option("--threads", e.threads, "worker threads (0 = all cores)");

  StatsArgs s;
  auto* st = app.add_subcommand("stats", "eigenvalue statistics of Wigner ensembles");
  st->add_option("--ens", s.ens, "ensemble")->default_val(s.ens);
  st->add_option("--law", s.laws, "uniform, gaussian, laplace (equal coefficient std)")
      ->default_val(s.laws);
  st->add_option("--A", s.A, "uniform half width")->default_val(s.A);
  st->add_option("--n", s.n, "comma-separated dimensions")->default_val(s.n);
  st->add_option("--samples", s.samples, "matrices per cell")->default_val(s.samples);
  st->add_option("--bins", s.bins, "histogram bins")->default_val(s.bins);
  st->add_option("--seed", s.seed, "global seed");
  st->add_option("--hist-dir", s.hist_dir, "write histogram CSVs here");
  st->add_option("--tol", s.tol, "allowed |std - A sqrt(n/3)|")->default_val(s.tol);
  st->add_flag("--check", s.check, "exit 2 when a cell is out of tolerance");
  st->add_option("--threads", s.threads, "worker threads (0 = all cores)");

  VocabArgs v;
  auto* vo = app.add_subcommand("vocab", "export a vocabulary, one token per line");
  vo->add_option("--scheme", v.scheme, "encoding")->default_val(v.scheme);
  vo->add_option("--max-dim", v.max_dim, "largest V token")->default_val(v.max_dim);
  vo->add_option("--tasks", v.tasks, "task names or tokens to append");
  vo->add_option("--out", v.out, "output file (default stdout)");

  ParamArgs p;
  auto* pc = app.add_subcommand("paramcount", "transformer parameter count");
  pc->add_option("--layers", p.layers, "<encoder>/<decoder>")->default_val(p.layers);
  pc->add_option("--dim", p.dim, "model dimension")->default_val(p.dim);
  pc->add_option("--dim-enc", p.dim_enc, "encoder dimension");
  pc->add_option("--dim-dec", p.dim_dec, "decoder dimension");
  pc->add_option("--wi", p.wi, "input vocabulary size (default from the scheme)");
  pc->add_option("--wo", p.wo, "output vocabulary size (default from the scheme)");
  pc->add_option("--wp", p.wp, "positional table size (default longest sequence)");
  pc->add_option("--scheme", p.scheme, "encoding")->default_val(p.scheme);
  pc->add_option("--scheme-in", p.scheme_in, "input encoding");
  pc->add_option("--scheme-out", p.scheme_out, "output encoding");
  pc->add_option("--task", p.task, "task used to size w_p")->default_val(p.task);
  pc->add_option("--dims", p.dims, "task dimensions")->default_val(p.dims);
  pc->add_option("--max-dim", p.max_dim, "largest V token")->default_val(p.max_dim);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return do_gen(g, out);
    if (*ev) return do_eval(e, out);
    if (*st) return do_stats(s, out);
    if (*vo) return do_vocab(v, out);
    if (*pc) return do_paramcount(p, out);
  } catch (const std::invalid_argument& ex) {
    err << "linseq: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "linseq: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace linseq::cli
