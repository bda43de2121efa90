#include "phaselab/wavepackets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {
constexpr double kPi = std::numbers::pi;
}

WavePacket::WavePacket(double xi, std::vector<double> p, std::vector<double> q, double hbar,
                       int n_particles, int dims)
    : xi_(xi), p_(std::move(p)), q_(std::move(q)), hbar_(hbar), n_particles_(n_particles),
      dims_(dims) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw std::invalid_argument("packet width xi must be > 0");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be > 0");
  if (n_particles < 1 || dims < 1)
    throw std::invalid_argument("packet needs n_particles >= 1 and dims >= 1");
  const auto expected = static_cast<std::size_t>(n_particles) * static_cast<std::size_t>(dims);
  if (p_.size() != expected || q_.size() != expected)
    throw std::invalid_argument("packet labels need n_particles*dims = " +
                                std::to_string(expected) + " entries");
  for (std::size_t k = 0; k < expected; ++k)
    if (!std::isfinite(p_[k]) || !std::isfinite(q_[k]))
      throw std::invalid_argument("packet labels must be finite");
  factor_norm_ = std::pow(2.0 * kPi * xi * xi, -0.25);
}

WavePacket WavePacket::one_dimensional(double xi, double p, double q, double hbar) {
  return WavePacket(xi, {p}, {q}, hbar, 1, 1);
}

complex WavePacket::factor(std::size_t k, double x) const {
  const double d = x - q_[k];
  const double envelope = factor_norm_ * std::exp(-d * d / (4.0 * xi_ * xi_));
  return std::polar(envelope, p_[k] * d / hbar_);
}

complex WavePacket::evaluate(std::span<const double> r) const {
  if (r.size() != p_.size())
    throw std::invalid_argument("position has " + std::to_string(r.size()) +
                                " entries, packet has " + std::to_string(p_.size()));
  complex value = 1.0;
  for (std::size_t k = 0; k < r.size(); ++k) value *= factor(k, r[k]);
  return value;
}

std::vector<complex> WavePacket::sample_factor(std::size_t k, const PositionGrid& grid) const {
  std::vector<complex> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = factor(k, grid.x(i));
  return out;
}

bool WavePacket::shares_shape_with(const WavePacket& other) const noexcept {
  return xi_ == other.xi_ && hbar_ == other.hbar_ && n_particles_ == other.n_particles_ &&
         dims_ == other.dims_;
}

OverlapValue OverlapValue::from(complex z) {
  return {std::abs(z), std::arg(z)};
}

namespace {

void require_same_shape(const WavePacket& a, const WavePacket& b) {
  if (!a.shares_shape_with(b))
    throw std::invalid_argument("packets must share xi, hbar, n_particles and dims");
}

}  // namespace

OverlapValue overlap_analytic(const WavePacket& a, const WavePacket& b) {
  require_same_shape(a, b);
  const double xi = a.xi(), hbar = a.hbar();
  double dq2 = 0.0, dp2 = 0.0, phase = 0.0;
  for (std::size_t k = 0; k < a.coordinates(); ++k) {
    const double dq = a.q()[k] - b.q()[k];
    const double dp = a.p()[k] - b.p()[k];
    dq2 += dq * dq;
    dp2 += dp * dp;
    phase += (a.p()[k] + b.p()[k]) * dq;
  }
  const double magnitude =
      std::exp(-dq2 / (8.0 * xi * xi)) * std::exp(-dp2 * xi * xi / (2.0 * hbar * hbar));
  return OverlapValue::from(std::polar(magnitude, phase / (2.0 * hbar)));
}

OverlapValue overlap_quadrature(const WavePacket& a, const WavePacket& b,
                                const PositionGrid& grid) {
  require_same_shape(a, b);
  const WavePacket pair[] = {a, b};
  require_compliant(grid, pair);
  complex value = 1.0;
  for (std::size_t k = 0; k < a.coordinates(); ++k)
    value *= grid.inner(a.sample_factor(k, grid), b.sample_factor(k, grid));
  return OverlapValue::from(value);
}

void require_compliant(const PositionGrid& grid, std::span<const WavePacket> packets,
                       double margin_widths) {
  for (const auto& packet : packets) {
    const double margin = margin_widths * packet.xi();
    for (std::size_t k = 0; k < packet.coordinates(); ++k) {
      const double q = packet.q()[k], p = packet.p()[k];
      if (grid.start() > q - margin || grid.stop() < q + margin)
        throw ComplianceError("grid-extent", "grid [" + std::to_string(grid.start()) + ", " +
                                                 std::to_string(grid.stop()) +
                                                 "] does not reach " +
                                                 std::to_string(margin_widths) +
                                                 " xi beyond centre " + std::to_string(q));
      if (p != 0.0) {
        const double wavelength = 2.0 * kPi * packet.hbar() / std::abs(p);
        if (grid.step() > wavelength / 8.0)
          throw ComplianceError("grid-resolution",
                                "step " + std::to_string(grid.step()) +
                                    " gives fewer than 8 points per wavelength for p = " +
                                    std::to_string(p));
      }
      const double norm = grid.norm_squared(packet.sample_factor(k, grid));
      if (std::abs(norm - 1.0) > 1e-6)
        throw ComplianceError("norm-check", "packet factor norm " + std::to_string(norm) +
                                                " differs from 1 by more than 1e-6");
    }
  }
}

PositionGrid grid_for(std::span<const WavePacket> packets, double points_per_wavelength,
                      double margin_widths) {
  if (packets.empty()) throw std::invalid_argument("grid_for needs at least one packet");
  double lo = INFINITY, hi = -INFINITY, pmax = 0.0;
  double step = INFINITY;
  for (const auto& packet : packets) {
    for (std::size_t k = 0; k < packet.coordinates(); ++k) {
      lo = std::min(lo, packet.q()[k] - margin_widths * packet.xi());
      hi = std::max(hi, packet.q()[k] + margin_widths * packet.xi());
      pmax = std::max(pmax, std::abs(packet.p()[k]));
    }
    step = std::min(step, packet.xi() / 8.0);
    if (pmax > 0.0)
      step = std::min(step, 2.0 * kPi * packet.hbar() / (points_per_wavelength * pmax));
  }
  return PositionGrid::covering(lo, hi, step);
}

Moments moments(const WavePacket& packet) {
  const WavePacket single[] = {packet};
  return moments(packet, grid_for(single, 32.0, 12.0));
}

Moments moments(const WavePacket& packet, const PositionGrid& grid) {
  const WavePacket single[] = {packet};
  require_compliant(grid, single);
  const std::size_t dn = packet.coordinates();
  const double hbar = packet.hbar();

  struct Factor {
    double norm, mean_x, mean_p, var_x, var_p;
  };
  std::vector<Factor> factors(dn);
  std::vector<double> buf(grid.size());
  for (std::size_t k = 0; k < dn; ++k) {
    const auto phi = packet.sample_factor(k, grid);
    const auto dphi = spectral_derivative(phi, grid.step());
    const double q = packet.q()[k], p = packet.p()[k];
    Factor f{};
    f.norm = grid.norm_squared(phi);
    for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = grid.x(i) * std::norm(phi[i]);
    f.mean_x = grid.integrate(buf);
    for (std::size_t i = 0; i < grid.size(); ++i)
      buf[i] = hbar * (std::conj(phi[i]) * dphi[i]).imag();
    f.mean_p = grid.integrate(buf);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid.x(i) - q;
      buf[i] = d * d * std::norm(phi[i]);
    }
    f.var_x = grid.integrate(buf);
    for (std::size_t i = 0; i < grid.size(); ++i)
      buf[i] = std::norm(complex(0.0, -hbar) * dphi[i] - p * phi[i]);
    f.var_p = grid.integrate(buf);
    factors[k] = f;
  }

  Moments m;
  for (std::size_t k = 0; k < dn; ++k) {
    double others = 1.0;
    for (std::size_t j = 0; j < dn; ++j)
      if (j != k) others *= factors[j].norm;
    const Factor& f = factors[k];
    m.mean_position.push_back(f.mean_x * others);
    m.mean_momentum.push_back(f.mean_p * others);
    m.rms_position.push_back(std::sqrt(f.var_x * others));
    m.rms_momentum.push_back(std::sqrt(f.var_p * others));

    const double xi = packet.xi();
    const double sigma_p = hbar / (2.0 * xi);
    m.max_mean_position_deviation =
        std::max(m.max_mean_position_deviation, std::abs(m.mean_position[k] - packet.q()[k]));
    m.max_mean_momentum_deviation =
        std::max(m.max_mean_momentum_deviation, std::abs(m.mean_momentum[k] - packet.p()[k]));
    m.max_rms_position_relative_deviation = std::max(
        m.max_rms_position_relative_deviation, std::abs(m.rms_position[k] - xi) / xi);
    m.max_rms_momentum_relative_deviation = std::max(
        m.max_rms_momentum_relative_deviation, std::abs(m.rms_momentum[k] - sigma_p) / sigma_p);
  }
  return m;
}

EigenResidual eigen_residual(const WavePacket& packet, double dq, double dp) {
  if (!(dq > 0.0) || !(dp > 0.0))
    throw std::invalid_argument("grid spacings dq and dp must be positive");
  const Moments m = moments(packet);
  EigenResidual r;
  // Every coordinate has the same widths; report the largest.
  r.position_residual = *std::max_element(m.rms_position.begin(), m.rms_position.end()) / dq;
  r.momentum_residual = *std::max_element(m.rms_momentum.begin(), m.rms_momentum.end()) / dp;
  r.position_closed_form = packet.xi() / dq;
  r.momentum_closed_form = packet.hbar() / (2.0 * packet.xi() * dp);
  return r;
}

}  // namespace phaselab
