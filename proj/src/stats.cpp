#include "phaselab/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phaselab {

std::complex<double> gaussian_pair(std::mt19937_64& rng) {
  const double u = 1.0 - unit_uniform(rng);
  const double v = unit_uniform(rng);
  return std::polar(std::sqrt(-2.0 * std::log(u)), 2.0 * std::numbers::pi * v);
}

void RunningStats::add(double x) noexcept {
  ++n_;
  const double d = x - mean_;
  mean_ += d / double(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / double(n_ - 1) : 0.0;
}

MonteCarloEstimate RunningStats::estimate() const noexcept {
  return {mean_, n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0, n_};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope needs two equally sized series of length >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("loglog_slope needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace phaselab
