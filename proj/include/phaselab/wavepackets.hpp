#pragma once

// Minimum-uncertainty Gaussian wave packets labelled by a phase-space point.
//
//   phi_pq(r) = (2 pi xi^2)^(-D/4) exp(-(r - q)^2 / 4 xi^2) exp(+i p.(r - q) / hbar)
//
// with D = n_particles * dims coordinates. A multi-particle packet is the
// product of one-dimensional factors, one per coordinate.
//
// With this phase convention the closed-form overlap is
//
//   <phi_a|phi_b> = exp(-(q_a - q_b)^2 / 8 xi^2) exp(-(p_a - p_b)^2 xi^2 / 2 hbar^2)
//                   * exp(+i (p_a + p_b).(q_a - q_b) / 2 hbar)
//
// The phase factor is the one confirmed by quadrature; the magnitude is what
// all orthogonality statements rely on.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "phaselab/quadrature.hpp"

namespace phaselab {

class WavePacket {
 public:
  WavePacket(double xi, std::vector<double> p, std::vector<double> q, double hbar = 1.0,
             int n_particles = 1, int dims = 1);

  /// Single-coordinate convenience constructor (N = 1, d = 1).
  static WavePacket one_dimensional(double xi, double p, double q, double hbar = 1.0);

  double xi() const noexcept { return xi_; }
  double hbar() const noexcept { return hbar_; }
  int n_particles() const noexcept { return n_particles_; }
  int dims() const noexcept { return dims_; }
  std::size_t coordinates() const noexcept { return p_.size(); }
  const std::vector<double>& p() const noexcept { return p_; }
  const std::vector<double>& q() const noexcept { return q_; }

  /// Full amplitude at a configuration r with coordinates() entries.
  complex evaluate(std::span<const double> r) const;
  /// One-dimensional factor for coordinate k.
  complex factor(std::size_t k, double x) const;
  /// Samples factor k on a grid.
  std::vector<complex> sample_factor(std::size_t k, const PositionGrid& grid) const;

  bool shares_shape_with(const WavePacket& other) const noexcept;

 private:
  double xi_;
  std::vector<double> p_;
  std::vector<double> q_;
  double hbar_;
  int n_particles_;
  int dims_;
  double factor_norm_;
};

struct OverlapValue {
  double magnitude = 0.0;
  double phase = 0.0;  // (-pi, pi]

  complex value() const { return std::polar(magnitude, phase); }
  static OverlapValue from(complex z);
};

struct EigenResidual {
  double position_residual = 0.0;  // ||(q^ - q) phi|| / dq
  double momentum_residual = 0.0;  // ||(p^ - p) phi|| / dp
  double position_closed_form = 0.0;  // xi / dq
  double momentum_closed_form = 0.0;  // hbar / (2 xi dp)
};

/// Quadrature moments, per coordinate.
struct Moments {
  std::vector<double> mean_position;
  std::vector<double> mean_momentum;
  std::vector<double> rms_position;  // sqrt <(q^ - q)^2>
  std::vector<double> rms_momentum;  // sqrt <(p^ - p)^2>
  /// Largest deviation from the closed forms q, p, xi, hbar/2xi.
  double max_mean_position_deviation = 0.0;
  double max_mean_momentum_deviation = 0.0;
  double max_rms_position_relative_deviation = 0.0;
  double max_rms_momentum_relative_deviation = 0.0;
};

OverlapValue overlap_analytic(const WavePacket& a, const WavePacket& b);

/// Simpson quadrature of conj(a) b, coordinate by coordinate on `grid`.
/// Throws ComplianceError when the grid is too narrow or too coarse for
/// either packet.
OverlapValue overlap_quadrature(const WavePacket& a, const WavePacket& b,
                                const PositionGrid& grid);

/// Checks that `grid` extends at least `margin_widths` * xi beyond every
/// packet centre, resolves the fastest phase with >= 8 points per
/// wavelength, and reproduces unit norm within 1e-6.
void require_compliant(const PositionGrid& grid, std::span<const WavePacket> packets,
                       double margin_widths = 8.0);

/// A compliant grid for one coordinate of the given packets.
PositionGrid grid_for(std::span<const WavePacket> packets, double points_per_wavelength = 16.0,
                      double margin_widths = 10.0);

Moments moments(const WavePacket& packet);
Moments moments(const WavePacket& packet, const PositionGrid& grid);

EigenResidual eigen_residual(const WavePacket& packet, double dq, double dp);

}  // namespace phaselab
