#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>

namespace phaselab {

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Running mean/variance (Welford).
class RunningStats {
 public:
  void add(double x) noexcept;
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // unbiased
  MonteCarloEstimate estimate() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Uniform on [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Two independent standard normals as one complex number (Box-Muller).
std::complex<double> gaussian_pair(std::mt19937_64& rng);

/// SplitMix64 finaliser; used to derive per-sample seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace phaselab
