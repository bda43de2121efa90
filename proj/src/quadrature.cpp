#include "phaselab/quadrature.hpp"

#include <cmath>

namespace phaselab {

std::vector<double> simpson_weights(std::size_t points, double h) {
  if (points < 3 || points % 2 == 0)
    throw std::invalid_argument("Simpson rule needs an odd point count >= 3");
  std::vector<double> w(points);
  for (std::size_t i = 0; i < points; ++i) {
    double c = (i == 0 || i + 1 == points) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * h / 3.0;
  }
  return w;
}

PositionGrid::PositionGrid(double start, double step, std::size_t points)
    : start_(start), step_(step), points_(points) {
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(start))
    throw std::invalid_argument("position grid step must be positive and finite");
  w_ = simpson_weights(points, step);
  x_.resize(points);
  for (std::size_t i = 0; i < points; ++i) x_[i] = x(i);
}

PositionGrid PositionGrid::covering(double lo, double hi, double max_step) {
  if (!(hi > lo)) throw std::invalid_argument("grid interval must have hi > lo");
  if (!(max_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / max_step));
  if (panels < 2) panels = 2;
  if (panels % 2 == 1) ++panels;
  return PositionGrid(lo, (hi - lo) / double(panels), panels + 1);
}

double PositionGrid::integrate(std::span<const double> f) const {
  if (f.size() != points_) throw std::invalid_argument("sample count does not match grid");
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < points_; ++i) s.add(w_[i] * f[i]);
  return s.value();
}

complex PositionGrid::integrate(std::span<const complex> f) const {
  if (f.size() != points_) throw std::invalid_argument("sample count does not match grid");
  CompensatedSum<complex> s;
  for (std::size_t i = 0; i < points_; ++i) s.add(w_[i] * f[i]);
  return s.value();
}

complex PositionGrid::inner(std::span<const complex> a, std::span<const complex> b) const {
  if (a.size() != points_ || b.size() != points_)
    throw std::invalid_argument("sample count does not match grid");
  CompensatedSum<complex> s;
  for (std::size_t i = 0; i < points_; ++i) s.add(w_[i] * std::conj(a[i]) * b[i]);
  return s.value();
}

double PositionGrid::norm_squared(std::span<const complex> f) const {
  if (f.size() != points_) throw std::invalid_argument("sample count does not match grid");
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < points_; ++i) s.add(w_[i] * std::norm(f[i]));
  return s.value();
}

bool PositionGrid::same_as(const PositionGrid& other) const noexcept {
  return points_ == other.points_ && start_ == other.start_ && step_ == other.step_;
}

}  // namespace phaselab
