#pragma once

// Coarse lattice of classical phase points and the naive projector onto the
// packets that sit on it:
//
//   psi_pq = <phi_pq|psi>,   psi(r) ~ sum_pq psi_pq phi_pq(r)

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaselab/quadrature.hpp"
#include "phaselab/wavepackets.hpp"

namespace phaselab {

struct Range {
  double min = 0.0;
  double max = 0.0;
};

/// Per-coordinate lattice indices of one phase point. Labels are
/// index * spacing + range minimum.
struct LatticeIndex {
  int ip = 0;
  int iq = 0;
};

class PhaseGrid {
 public:
  PhaseGrid(double xi, double hbar, double dq, double dp, Range q_range, Range p_range,
            int dims = 1, int n_particles = 1);

  /// dq = 10 xi, dp = 10 hbar / xi.
  static PhaseGrid balanced(double xi, double hbar, Range q_range, Range p_range);

  double xi() const noexcept { return xi_; }
  double hbar() const noexcept { return hbar_; }
  double dq() const noexcept { return dq_; }
  double dp() const noexcept { return dp_; }
  Range q_range() const noexcept { return q_range_; }
  Range p_range() const noexcept { return p_range_; }
  int dims() const noexcept { return dims_; }
  int n_particles() const noexcept { return n_particles_; }
  std::size_t coordinates() const noexcept {
    return static_cast<std::size_t>(dims_) * static_cast<std::size_t>(n_particles_);
  }

  int nq() const noexcept { return nq_; }
  int np() const noexcept { return np_; }
  double q_label(int iq) const noexcept { return q_range_.min + dq_ * iq; }
  double p_label(int ip) const noexcept { return p_range_.min + dp_ * ip; }

  /// Number of lattice points, (nq * np)^coordinates.
  std::size_t size() const noexcept;
  /// Per-coordinate indices of the flat (row-major) lattice position.
  std::vector<LatticeIndex> index(std::size_t flat) const;

  /// One packet per lattice point, coordinate 0 most significant, q outer
  /// and p inner within a coordinate.
  std::vector<WavePacket> enumerate_packets() const;

  /// Warnings when the spacings leave the locally orthogonal regime
  /// (dq >> 2 xi, dp >> hbar / xi).
  std::vector<std::string> diagnostics() const;

 private:
  double xi_, hbar_, dq_, dp_;
  Range q_range_, p_range_;
  int dims_, n_particles_;
  int nq_, np_;
};

/// Complex samples of a one-dimensional wave function on a position grid.
class GridWaveFunction {
 public:
  GridWaveFunction(PositionGrid grid, std::vector<complex> samples);
  static GridWaveFunction zero(PositionGrid grid);
  static GridWaveFunction from_packet(const WavePacket& packet, const PositionGrid& grid);
  static GridWaveFunction superposition(std::span<const WavePacket> packets,
                                        std::span<const complex> amplitudes,
                                        const PositionGrid& grid);

  const PositionGrid& grid() const noexcept { return grid_; }
  const std::vector<complex>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  double norm_squared() const { return grid_.norm_squared(samples_); }
  double norm() const;
  GridWaveFunction normalized() const;
  complex inner(const GridWaveFunction& other) const;

  GridWaveFunction scaled(complex factor) const;
  GridWaveFunction plus(const GridWaveFunction& other) const;

 private:
  PositionGrid grid_;
  std::vector<complex> samples_;
};

/// |<a|b>| / (||a|| ||b||).
double fidelity(const GridWaveFunction& a, const GridWaveFunction& b);

struct ProjectionCoefficients {
  PhaseGrid grid;
  PositionGrid positions;       // grid of the projected wave function
  std::vector<complex> coeffs;  // enumeration order of grid.enumerate_packets()

  complex at(int ip, int iq) const;
  double sum_squared() const;
  /// Columns: ip, iq, p, q, re, im.
  void write_csv(std::ostream& os) const;
};

ProjectionCoefficients project(const GridWaveFunction& psi, const PhaseGrid& grid);
GridWaveFunction reconstruct(const ProjectionCoefficients& coeffs);

struct ProjectionSummary {
  double input_norm_squared = 0.0;
  double coefficient_sum_squared = 0.0;
  double reconstruction_norm_squared = 0.0;
  double fidelity = 0.0;
  double leaked_norm = 0.0;  // max(0, 1 - ||psi_rec||^2 / ||psi||^2)
};

ProjectionSummary summarize_projection(const GridWaveFunction& psi,
                                       const ProjectionCoefficients& coeffs);

/// Lattice covering the support of psi (|psi|^2 above `threshold` times its
/// peak, in position and in momentum), padded by 6 xi in position and by
/// 6 momentum widths (hbar / 2 xi each) in momentum.
PhaseGrid covering_grid(const GridWaveFunction& psi, double xi, double hbar, double dq,
                        double dp, double threshold = 1e-10);

}  // namespace phaselab
