#pragma once

// Random matrix ensembles.
//
// Wigner-type ensembles draw iid coefficients (the upper triangle, mirrored,
// when symmetric). Spectral resampling keeps the eigenvectors of a gaussian
// symmetric matrix and replaces its eigenvalues with draws from a prescribed
// law, so the spectrum can be controlled independently of the coefficients.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linseq/matrix.hpp"
#include "linseq/rng.hpp"

namespace linseq {

enum class EigFamily { Positive, Uniform, Gaussian, Laplace };

std::string_view to_string(EigFamily f);
/// "positive", "uniform", "gaussian", "laplace". Throws std::invalid_argument.
EigFamily parse_eig_family(std::string_view name);

/// Eigenvalue law. `scale` is the target standard deviation for Uniform,
/// Gaussian and Laplace; Positive draws |N(0, scale^2)|.
struct EigDist {
  EigFamily family = EigFamily::Laplace;
  double scale = 1.0;

  double draw(Rng& rng) const;
};

struct IidUniform {
  double half_width = 10.0;  // coefficients in [-A, A]
};
struct IidGaussian {
  double sigma = 1.0;
};
struct IidLaplace {
  double sigma = 1.0;  // coefficient standard deviation
};
/// Per matrix, A ~ U[min, max], then iid U[-A, A] coefficients.
struct UniformWidthMixture {
  double min_half_width = 1.0;
  double max_half_width = 100.0;
};
/// Symmetric only: Q^T D' Q with Q from a gaussian symmetric draw.
struct SpectralResample {
  EigDist eigenvalues;
};

using CoefficientLaw =
    std::variant<IidUniform, IidGaussian, IidLaplace, UniformWidthMixture, SpectralResample>;

struct WeightedLaw {
  double weight = 1.0;
  CoefficientLaw law;
};

struct DimRange {
  std::size_t min_rows = 5;
  std::size_t max_rows = 5;
  std::size_t min_cols = 5;
  std::size_t max_cols = 5;
  bool square = true;

  static DimRange fixed(std::size_t rows, std::size_t cols);
  static DimRange square_range(std::size_t lo, std::size_t hi);
  static DimRange rect_range(std::size_t row_lo, std::size_t row_hi, std::size_t col_lo,
                             std::size_t col_hi);
  /// "5x5", "6x4", "5-15" (square), "5-15x5-15" (rectangular).
  static DimRange parse(std::string_view text);
  std::string to_string() const;

  bool is_fixed() const noexcept { return min_rows == max_rows && min_cols == max_cols; }
  std::size_t max_dim() const noexcept { return std::max(max_rows, max_cols); }

  friend bool operator==(const DimRange&, const DimRange&) = default;
};

struct EnsembleSpec {
  CoefficientLaw law = IidUniform{};
  // When non-empty, one component is drawn per matrix with probability
  // proportional to its weight, and `law` is ignored.
  std::vector<WeightedLaw> mixture;
  bool symmetric = false;
  DimRange dims;

  /// Throws std::invalid_argument.
  void validate() const;
  /// Standard deviation of a single coefficient (spectral laws use max_rows).
  double coefficient_std() const;
};

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

Shape draw_shape(const EnsembleSpec& spec, Rng& rng);
/// One matrix of the given shape; dims in `spec` are ignored.
Matrix sample_matrix(const EnsembleSpec& spec, std::size_t rows, std::size_t cols, Rng& rng);
/// Deterministic in (spec, seed).
Matrix sample(const EnsembleSpec& spec, std::uint64_t seed);

Matrix spectral_resample(const EigDist& dist, std::size_t n, std::uint64_t seed);
/// Symmetric matrix with exactly the given eigenvalues and random eigenvectors.
Matrix spectral_resample(std::span<const double> eigenvalues, std::uint64_t seed);

/// Eigenvalue standard deviation of an n x n Wigner matrix with U[-A, A]
/// coefficients: A * sqrt(n / 3).
double wigner_eig_std(double half_width, std::size_t n);
/// Semicircle density with variance sigma^2 (support [-2 sigma, 2 sigma]).
double semicircle_density(double x, double sigma);
double semicircle_cdf(double x, double sigma);

/// Kolmogorov-Smirnov distance between the empirical CDF of `sorted` and `cdf`.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::uint64_t> counts;

  /// "bin_left,bin_right,count" header and one row per bin.
  void write_csv(std::ostream& os) const;
};

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

struct EigenSample {
  std::vector<double> values;  // pooled, ascending
  std::size_t matrices = 0;
  double mean = 0.0;
  double stddev = 0.0;
  // Monte-Carlo standard error of `stddev`, from the per-matrix spread of the
  // mean squared eigenvalue.
  double stddev_error = 0.0;
};

/// Pools the eigenvalues of `samples` symmetric draws; matrix i uses
/// derive_seed(seed, i). Output does not depend on `threads` (0 = hardware).
EigenSample pooled_eigenvalues(const EnsembleSpec& spec, std::size_t samples, std::uint64_t seed,
                               unsigned threads = 0);

struct EigHistogram {
  Histogram histogram;
  std::size_t matrices = 0;
  std::size_t eigenvalues = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stddev_error = 0.0;
  // Semicircle scale used for the KS distance: coefficient std * sqrt(n) for
  // fixed square iid ensembles, the empirical std otherwise.
  double semicircle_sigma = 0.0;
  double semicircle_ks = 0.0;
};

EigHistogram eig_histogram(const EnsembleSpec& spec, std::size_t samples, std::size_t bins,
                           std::uint64_t seed, unsigned threads = 0);

/// m plus N(0, (level * coeff_std)^2) per coefficient. Exactly symmetric input
/// gets mirrored noise (upper triangle drawn) unless `mirror_symmetric` is false.
Matrix add_noise(const Matrix& m, double level, double coeff_std, std::uint64_t seed,
                 bool mirror_symmetric = true);

}  // namespace linseq
