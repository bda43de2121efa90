#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace phaselab {

using complex = std::complex<double>;

/// Raised when a numerical compliance gate (norm check, resolution check,
/// Hermiticity check) fails. `check()` names the gate that tripped.
class ComplianceError : public std::runtime_error {
 public:
  ComplianceError(std::string check, const std::string& what)
      : std::runtime_error(check + ": " + what), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

/// Uniform 1D position grid integrated with composite Simpson.
/// The point count is always odd (an even number of Simpson panels).
class PositionGrid {
 public:
  PositionGrid(double start, double step, std::size_t points);

  /// Smallest odd-sized grid with spacing <= `max_step` covering [lo, hi].
  static PositionGrid covering(double lo, double hi, double max_step);

  double start() const noexcept { return start_; }
  double step() const noexcept { return step_; }
  double stop() const noexcept { return start_ + step_ * double(points_ - 1); }
  std::size_t size() const noexcept { return points_; }
  double x(std::size_t i) const noexcept { return start_ + step_ * double(i); }

  const std::vector<double>& positions() const noexcept { return x_; }
  const std::vector<double>& weights() const noexcept { return w_; }

  double integrate(std::span<const double> f) const;
  complex integrate(std::span<const complex> f) const;
  /// Simpson approximation of <a|b> = integral conj(a) b.
  complex inner(std::span<const complex> a, std::span<const complex> b) const;
  double norm_squared(std::span<const complex> f) const;

  bool same_as(const PositionGrid& other) const noexcept;

 private:
  double start_;
  double step_;
  std::size_t points_;
  std::vector<double> x_;
  std::vector<double> w_;
};

/// Composite Simpson weights for `points` (odd, >= 3) nodes with spacing h.
std::vector<double> simpson_weights(std::size_t points, double h);

/// Neumaier-compensated accumulator.
template <typename T>
class CompensatedSum {
 public:
  void add(T v) {
    if constexpr (std::is_same_v<T, complex>) {
      re_.add(v.real());
      im_.add(v.imag());
    } else {
      T t = sum_ + v;
      if (std::abs(sum_) >= std::abs(v))
        c_ += (sum_ - t) + v;
      else
        c_ += (v - t) + sum_;
      sum_ = t;
    }
  }
  T value() const {
    if constexpr (std::is_same_v<T, complex>)
      return {re_.value(), im_.value()};
    else
      return sum_ + c_;
  }

 private:
  struct Empty {};
  T sum_{};
  T c_{};
  // Real and imaginary parts are compensated independently.
  std::conditional_t<std::is_same_v<T, complex>, CompensatedSum<double>, Empty> re_{};
  std::conditional_t<std::is_same_v<T, complex>, CompensatedSum<double>, Empty> im_{};
};

}  // namespace phaselab
