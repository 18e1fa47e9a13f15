#include "linseq/randmat.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "linseq/error.hpp"
#include "linseq/linalg.hpp"
#include "parallel.hpp"

namespace linseq {

namespace {

constexpr int kResampleAttempts = 10;

std::size_t parse_size(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("bad dimension spec '" + std::string(whole) + "'");
  return v;
}

std::pair<std::size_t, std::size_t> parse_range(std::string_view s, std::string_view whole) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    const auto v = parse_size(s, whole);
    return {v, v};
  }
  return {parse_size(s.substr(0, dash), whole), parse_size(s.substr(dash + 1), whole)};
}

std::string range_string(std::size_t lo, std::size_t hi) {
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

double law_std(const CoefficientLaw& law, std::size_t n) {
  struct {
    std::size_t n;
    double operator()(const IidUniform& u) const { return u.half_width / std::sqrt(3.0); }
    double operator()(const IidGaussian& g) const { return g.sigma; }
    double operator()(const IidLaplace& l) const { return l.sigma; }
    double operator()(const UniformWidthMixture& w) const {
      const double a = w.min_half_width;
      const double b = w.max_half_width;
      return std::sqrt((a * a + a * b + b * b) / 9.0);  // E[A^2] / 3
    }
    // sum_ij m_ij^2 = sum_k l_k^2, spread over n^2 coefficients
    double operator()(const SpectralResample& s) const {
      return s.eigenvalues.scale / std::sqrt(static_cast<double>(n));
    }
  } visitor{n};
  return std::visit(visitor, law);
}

void validate_law(const CoefficientLaw& law, bool symmetric, bool square) {
  struct {
    bool symmetric, square;
    void operator()(const IidUniform& u) const {
      if (!(u.half_width > 0)) throw std::invalid_argument("uniform half width must be > 0");
    }
    void operator()(const IidGaussian& g) const {
      if (!(g.sigma > 0)) throw std::invalid_argument("gaussian sigma must be > 0");
    }
    void operator()(const IidLaplace& l) const {
      if (!(l.sigma > 0)) throw std::invalid_argument("laplace sigma must be > 0");
    }
    void operator()(const UniformWidthMixture& w) const {
      if (!(w.min_half_width > 0) || w.max_half_width < w.min_half_width)
        throw std::invalid_argument("bad half width range");
    }
    void operator()(const SpectralResample& s) const {
      if (!symmetric || !square)
        throw std::invalid_argument("spectral resampling needs a symmetric square ensemble");
      if (!(s.eigenvalues.scale > 0)) throw std::invalid_argument("eigenvalue scale must be > 0");
    }
  } visitor{symmetric, square};
  std::visit(visitor, law);
}

const CoefficientLaw& pick_law(const EnsembleSpec& spec, Rng& rng) {
  if (spec.mixture.empty()) return spec.law;
  double total = 0.0;
  for (const auto& c : spec.mixture) total += c.weight;
  double u = rng.uniform01() * total;
  for (const auto& c : spec.mixture) {
    if (u < c.weight) return c.law;
    u -= c.weight;
  }
  return spec.mixture.back().law;
}

template <class Draw>
Matrix fill(std::size_t rows, std::size_t cols, bool symmetric, Draw&& draw) {
  Matrix m(rows, cols);
  if (symmetric) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = i; j < cols; ++j) m(i, j) = m(j, i) = draw();
  } else {
    for (double& x : m.data()) x = draw();
  }
  return m;
}

Matrix gaussian_symmetric(std::size_t n, Rng& rng) {
  return fill(n, n, true, [&] { return rng.normal(); });
}

// Q^T diag(values) Q, Q holding eigenvectors as rows. Exactly symmetric.
Matrix reassemble(const Matrix& q, std::span<const double> values) {
  const std::size_t n = values.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(k, i) * values[k] * q(k, j);
      out(i, j) = out(j, i) = s;
    }
  }
  return out;
}

Matrix resample_with(Rng& rng, std::size_t n, const std::function<void(std::vector<double>&)>& draw) {
  for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
    const Matrix base = gaussian_symmetric(n, rng);
    EigenResult e;
    try {
      e = sym_eigen(base);
    } catch (const NoConvergence&) {
      continue;
    }
    std::vector<double> values(n);
    draw(values);
    return reassemble(e.vectors, values);
  }
  throw ResampleExhausted("spectral resampling: eigendecomposition kept failing");
}

}  // namespace

std::string_view to_string(EigFamily f) {
  switch (f) {
    case EigFamily::Positive: return "positive";
    case EigFamily::Uniform: return "uniform";
    case EigFamily::Gaussian: return "gaussian";
    case EigFamily::Laplace: return "laplace";
  }
  return "?";
}

EigFamily parse_eig_family(std::string_view name) {
  for (auto f : {EigFamily::Positive, EigFamily::Uniform, EigFamily::Gaussian, EigFamily::Laplace})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown eigenvalue law '" + std::string(name) + "'");
}

double EigDist::draw(Rng& rng) const {
  switch (family) {
    case EigFamily::Positive: return std::fabs(rng.normal()) * scale;
    case EigFamily::Uniform: {
      const double h = std::sqrt(3.0) * scale;
      return rng.uniform(-h, h);
    }
    case EigFamily::Gaussian: return rng.normal() * scale;
    case EigFamily::Laplace: return rng.laplace(scale / std::numbers::sqrt2);
  }
  return 0.0;
}

DimRange DimRange::fixed(std::size_t rows, std::size_t cols) {
  return {rows, rows, cols, cols, rows == cols};
}

DimRange DimRange::square_range(std::size_t lo, std::size_t hi) { return {lo, hi, lo, hi, true}; }

DimRange DimRange::rect_range(std::size_t row_lo, std::size_t row_hi, std::size_t col_lo,
                              std::size_t col_hi) {
  return {row_lo, row_hi, col_lo, col_hi, false};
}

DimRange DimRange::parse(std::string_view text) {
  DimRange d;
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    auto [lo, hi] = parse_range(text, text);
    d = square_range(lo, hi);
  } else {
    auto [rlo, rhi] = parse_range(text.substr(0, x), text);
    auto [clo, chi] = parse_range(text.substr(x + 1), text);
    d = rect_range(rlo, rhi, clo, chi);
    d.square = rlo == rhi && clo == chi && rlo == clo;
  }
  if (d.min_rows == 0 || d.min_cols == 0 || d.max_rows < d.min_rows || d.max_cols < d.min_cols)
    throw std::invalid_argument("bad dimension spec '" + std::string(text) + "'");
  return d;
}

std::string DimRange::to_string() const {
  if (square && !is_fixed()) return range_string(min_rows, max_rows);
  return range_string(min_rows, max_rows) + "x" + range_string(min_cols, max_cols);
}

void EnsembleSpec::validate() const {
  if (dims.min_rows == 0 || dims.min_cols == 0 || dims.max_rows < dims.min_rows ||
      dims.max_cols < dims.min_cols)
    throw std::invalid_argument("bad dimension range");
  const bool square = dims.square || (dims.is_fixed() && dims.min_rows == dims.min_cols);
  if (symmetric && !square) throw std::invalid_argument("symmetric ensembles must be square");
  if (mixture.empty()) {
    validate_law(law, symmetric, square);
    return;
  }
  double total = 0.0;
  for (const auto& c : mixture) {
    if (!(c.weight >= 0)) throw std::invalid_argument("mixture weights must be >= 0");
    total += c.weight;
    validate_law(c.law, symmetric, square);
  }
  if (!(total > 0)) throw std::invalid_argument("mixture weights sum to zero");
}

double EnsembleSpec::coefficient_std() const {
  if (mixture.empty()) return law_std(law, dims.max_rows);
  double total = 0.0;
  double var = 0.0;
  for (const auto& c : mixture) {
    const double s = law_std(c.law, dims.max_rows);
    var += c.weight * s * s;
    total += c.weight;
  }
  return std::sqrt(var / total);
}

Shape draw_shape(const EnsembleSpec& spec, Rng& rng) {
  const auto& d = spec.dims;
  if (d.is_fixed()) return {d.min_rows, d.min_cols};
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo),
                                                    static_cast<std::int64_t>(hi)));
  };
  if (d.square) {
    const auto n = pick(d.min_rows, d.max_rows);
    return {n, n};
  }
  const auto r = pick(d.min_rows, d.max_rows);
  return {r, pick(d.min_cols, d.max_cols)};
}

Matrix sample_matrix(const EnsembleSpec& spec, std::size_t rows, std::size_t cols, Rng& rng) {
  const bool sym = spec.symmetric;
  if (sym && rows != cols) throw ShapeError("symmetric sample needs a square shape");
  const CoefficientLaw& law = pick_law(spec, rng);
  struct {
    std::size_t rows, cols;
    bool sym;
    Rng& rng;
    Matrix operator()(const IidUniform& u) const {
      return fill(rows, cols, sym, [&] { return rng.uniform(-u.half_width, u.half_width); });
    }
    Matrix operator()(const IidGaussian& g) const {
      return fill(rows, cols, sym, [&] { return rng.normal() * g.sigma; });
    }
    Matrix operator()(const IidLaplace& l) const {
      const double b = l.sigma / std::numbers::sqrt2;
      return fill(rows, cols, sym, [&] { return rng.laplace(b); });
    }
    Matrix operator()(const UniformWidthMixture& w) const {
      const double a = rng.uniform(w.min_half_width, w.max_half_width);
      return fill(rows, cols, sym, [&] { return rng.uniform(-a, a); });
    }
    Matrix operator()(const SpectralResample& s) const {
      if (!sym) throw ShapeError("spectral resampling needs a symmetric ensemble");
      return resample_with(rng, rows, [&](std::vector<double>& v) {
        for (double& x : v) x = s.eigenvalues.draw(rng);
      });
    }
  } visitor{rows, cols, sym, rng};
  return std::visit(visitor, law);
}

Matrix sample(const EnsembleSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const Shape s = draw_shape(spec, rng);
  return sample_matrix(spec, s.rows, s.cols, rng);
}

Matrix spectral_resample(const EigDist& dist, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return resample_with(rng, n, [&](std::vector<double>& v) {
    for (double& x : v) x = dist.draw(rng);
  });
}

Matrix spectral_resample(std::span<const double> eigenvalues, std::uint64_t seed) {
  Rng rng(seed);
  return resample_with(rng, eigenvalues.size(), [&](std::vector<double>& v) {
    std::copy(eigenvalues.begin(), eigenvalues.end(), v.begin());
  });
}

double wigner_eig_std(double half_width, std::size_t n) {
  return half_width * std::sqrt(static_cast<double>(n) / 3.0);
}

double semicircle_density(double x, double sigma) {
  const double r = 2.0 * sigma;
  if (std::fabs(x) >= r) return 0.0;
  return 2.0 / (std::numbers::pi * r * r) * std::sqrt(r * r - x * x);
}

double semicircle_cdf(double x, double sigma) {
  const double r = 2.0 * sigma;
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  return 0.5 + x * std::sqrt(r * r - x * x) / (std::numbers::pi * r * r) +
         std::asin(x / r) / std::numbers::pi;
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

void Histogram::write_csv(std::ostream& os) const {
  os << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i)
    os << edges[i] << ',' << edges[i + 1] << ',' << counts[i] << '\n';
}

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + w * static_cast<double>(i);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>((v - lo) / w);
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

EigenSample pooled_eigenvalues(const EnsembleSpec& spec, std::size_t samples, std::uint64_t seed,
                               unsigned threads) {
  spec.validate();
  if (!spec.symmetric) throw std::invalid_argument("eigenvalue statistics need a symmetric ensemble");
  std::vector<std::vector<double>> per(samples);
  detail::parallel_for(0, samples, threads, [&](std::size_t i) {
    const Matrix m = sample(spec, derive_seed(seed, i));
    per[i] = sym_eigenvalues(m);
  });

  EigenSample out;
  out.matrices = samples;
  std::size_t total = 0;
  for (const auto& v : per) total += v.size();
  out.values.reserve(total);
  // per-matrix mean square, for the standard error of the pooled variance
  std::vector<double> msq(samples);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double s2 = 0.0;
    for (double x : per[i]) {
      sum += x;
      s2 += x * x;
      out.values.push_back(x);
    }
    msq[i] = per[i].empty() ? 0.0 : s2 / static_cast<double>(per[i].size());
  }
  if (total == 0) return out;
  const double n = static_cast<double>(total);
  out.mean = sum / n;
  double ss = 0.0;
  for (double x : out.values) ss += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(ss / n);
  if (samples > 1 && out.stddev > 0) {
    double mm = 0.0;
    for (double t : msq) mm += t;
    mm /= static_cast<double>(samples);
    double vv = 0.0;
    for (double t : msq) vv += (t - mm) * (t - mm);
    vv /= static_cast<double>(samples - 1);
    out.stddev_error = std::sqrt(vv / static_cast<double>(samples)) / (2.0 * out.stddev);
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

EigHistogram eig_histogram(const EnsembleSpec& spec, std::size_t samples, std::size_t bins,
                           std::uint64_t seed, unsigned threads) {
  const EigenSample es = pooled_eigenvalues(spec, samples, seed, threads);
  EigHistogram h;
  h.matrices = es.matrices;
  h.eigenvalues = es.values.size();
  h.mean = es.mean;
  h.stddev = es.stddev;
  h.stddev_error = es.stddev_error;
  const double lo = es.values.empty() ? 0.0 : es.values.front();
  const double hi = es.values.empty() ? 0.0 : es.values.back();
  h.histogram = make_histogram(es.values, bins, lo, hi);

  const bool iid = spec.mixture.empty() && !std::holds_alternative<SpectralResample>(spec.law) &&
                   !std::holds_alternative<UniformWidthMixture>(spec.law);
  if (iid && spec.dims.is_fixed())
    h.semicircle_sigma = spec.coefficient_std() * std::sqrt(static_cast<double>(spec.dims.min_rows));
  else
    h.semicircle_sigma = es.stddev;
  if (!es.values.empty() && h.semicircle_sigma > 0) {
    const double s = h.semicircle_sigma;
    h.semicircle_ks = ks_distance(es.values, [s](double x) { return semicircle_cdf(x, s); });
  }
  return h;
}

Matrix add_noise(const Matrix& m, double level, double coeff_std, std::uint64_t seed,
                 bool mirror_symmetric) {
  if (level < 0) throw std::invalid_argument("noise level must be >= 0");
  if (level == 0) return m;
  Rng rng(seed);
  const double sd = level * coeff_std;
  Matrix out = m;
  if (mirror_symmetric && m.is_square() && m.is_symmetric()) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i; j < m.cols(); ++j) {
        const double e = rng.normal() * sd;
        out(i, j) += e;
        if (i != j) out(j, i) += e;
      }
  } else {
    for (double& x : out.data()) x += rng.normal() * sd;
  }
  return out;
}

}  // namespace linseq
