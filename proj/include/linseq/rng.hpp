#pragma once

// Portable seeded random numbers.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distribution transforms are written out here because the
// standard library's distributions are implementation-defined, and datasets
// must regenerate identically everywhere.

#include <cstdint>
#include <random>

namespace linseq {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for item `index` of a stream started from `global_seed`:
/// splitmix64(splitmix64(global_seed) ^ index).
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  /// Laplace(0, b) by inverse CDF; standard deviation b * sqrt(2).
  double laplace(double b);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace linseq
