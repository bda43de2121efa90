#include "phaselab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace phaselab {
namespace {

struct FftBuffer {
  explicit FftBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  fftw_complex* data;
};

// Planning is not thread safe in FFTW; execution on fresh arrays is.
struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

std::mutex plan_mutex;

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(plan_mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  FftBuffer in(n), out(n);
  const int len = static_cast<int>(n);
  PlanPair p{fftw_plan_dft_1d(len, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED),
             fftw_plan_dft_1d(len, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED)};
  cache.emplace(n, p);
  return p;
}

}  // namespace

std::vector<double> dft_wavenumbers(std::size_t n, double h) {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / (double(n) * h);
  for (std::size_t j = 0; j < n; ++j) {
    auto m = static_cast<long long>(j);
    if (2 * j > n) m -= static_cast<long long>(n);
    k[j] = dk * double(m);
  }
  if (n % 2 == 0) k[n / 2] = 0.0;
  return k;
}

std::vector<std::complex<double>> apply_momentum_symbol(
    std::span<const std::complex<double>> samples, double h, double hbar,
    const std::function<std::complex<double>(double)>& symbol) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  const PlanPair plans = plans_for(n);
  FftBuffer a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.data[i][0] = samples[i].real();
    a.data[i][1] = samples[i].imag();
  }
  fftw_execute_dft(plans.forward, a.data, b.data);
  const auto k = dft_wavenumbers(n, h);
  for (std::size_t j = 0; j < n; ++j) {
    const bool nyquist = (n % 2 == 0 && j == n / 2);
    const std::complex<double> s = nyquist ? 0.0 : symbol(hbar * k[j]);
    const std::complex<double> v = std::complex<double>(b.data[j][0], b.data[j][1]) * s;
    b.data[j][0] = v.real();
    b.data[j][1] = v.imag();
  }
  fftw_execute_dft(plans.backward, b.data, a.data);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::complex<double>(a.data[i][0], a.data[i][1]) / double(n);
  return out;
}

std::vector<double> power_spectrum(std::span<const std::complex<double>> samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  const PlanPair plans = plans_for(n);
  FftBuffer a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.data[i][0] = samples[i].real();
    a.data[i][1] = samples[i].imag();
  }
  fftw_execute_dft(plans.forward, a.data, b.data);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = b.data[j][0] * b.data[j][0] + b.data[j][1] * b.data[j][1];
  return out;
}

std::vector<std::complex<double>> spectral_derivative(
    std::span<const std::complex<double>> samples, double h) {
  return apply_momentum_symbol(samples, h, 1.0,
                               [](double k) { return std::complex<double>(0.0, k); });
}

}  // namespace phaselab
