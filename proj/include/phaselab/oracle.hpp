#pragma once

// Brute-force quantum mechanics on a periodic grid [0, L). Used as the
// independent reference for the phase-space and expectation code.
//
// Grid functions are point samples psi(x_a); the inner product is
// h * sum conj(f) g, exact for trigonometric polynomials on the ring.
// Kinetic energy is built in the plane-wave basis, so the lattice plane
// waves <r|p> = exp(i p r / hbar) / sqrt(L), p = 2 pi hbar j / L, are exact
// free-particle eigenstates.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "phaselab/quadrature.hpp"

namespace phaselab {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Potential = std::function<double(double)>;

struct RingSpec {
  double length = 1.0;
  std::size_t points = 256;  // even
  double mass = 1.0;
  double hbar = 1.0;
};

/// Value plus an estimate of its absolute numerical error.
struct OracleValue {
  complex value;
  double error = 0.0;
};

Potential harmonic_potential(double mass, double omega, double centre);

class GridOperatorSet {
 public:
  GridOperatorSet(RingSpec spec, Potential potential = {});

  const RingSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return spec_.points; }
  double step() const noexcept { return spec_.length / double(spec_.points); }
  double x(std::size_t a) const noexcept { return step() * double(a); }
  bool free() const noexcept { return !has_potential_; }

  const RealMatrix& hamiltonian() const noexcept { return h_; }
  const ComplexMatrix& position() const noexcept { return x_; }
  const ComplexMatrix& momentum() const noexcept { return p_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return evals_; }
  /// Columns are l2-normalised eigenvectors; psi_k(x_a) = V(a, k) / sqrt(h).
  const RealMatrix& eigenvectors() const noexcept { return evecs_; }

  /// max_k ||H v_k - E_k v_k|| / ||H||.
  double eigen_residual() const noexcept { return residual_; }

  /// Momentum lattice value for integer j, |j| < points / 2.
  double lattice_momentum(int j) const;
  /// Integer lattice index of p; throws if p is off the lattice or beyond
  /// the grid's band.
  int lattice_index(double p) const;

  /// <x_a|p> for every grid point.
  ComplexVector plane_wave(double p) const;

  /// exp(-beta H) through the eigenbasis, as a matrix on grid samples.
  RealMatrix propagator(double beta) const;

  /// Samples of exp(-beta H) |p> on the grid.
  ComplexVector propagated_plane_wave(double beta, double p) const;

  /// <q| exp(-beta H) |p>. q is any position; off-grid values use
  /// trigonometric interpolation.
  OracleValue imaginary_time_element(double beta, double q, double p) const;

  /// Band-limited interpolation of grid samples at an arbitrary q.
  complex interpolate(const ComplexVector& samples, double q) const;

 private:
  RingSpec spec_;
  bool has_potential_ = false;
  RealMatrix h_;
  ComplexMatrix x_, p_;
  Eigen::VectorXd evals_;
  RealMatrix evecs_;
  double residual_ = 0.0;
  double h_norm_ = 0.0;
};

/// Matrix exponential by Pade scaling and squaring, independent of the
/// eigenbasis route.
RealMatrix expm(const RealMatrix& a);

/// Dense matrix of p^n on n uniformly spaced samples with spacing h.
ComplexMatrix momentum_power_matrix(std::size_t n, double h, double hbar, int power);

/// Throws ComplianceError("hermiticity") if |A - A^+| exceeds tol * max|A|.
void require_hermitian(const ComplexMatrix& a, double tol = 1e-12);

/// h * psi^+ A psi on the ring.
double dense_expectation(const GridOperatorSet& ops, const ComplexVector& psi,
                         const ComplexMatrix& obs);
/// sum_ab w_a conj(psi_a) A_ab psi_b with Simpson weights of `grid`.
/// The imaginary residue is returned through `imag` when requested.
double dense_expectation(const PositionGrid& grid, std::span<const complex> psi,
                         const ComplexMatrix& obs, double* imag = nullptr);

/// Two distinguishable particles on the same ring with a pair potential.
/// Dense over the n^2 product grid; row index a * n + b for (x_a, x_b).
class TwoParticleOperatorSet {
 public:
  TwoParticleOperatorSet(RingSpec spec, Potential external, std::function<double(double)> pair);

  std::size_t points() const noexcept { return spec_.points; }
  double step() const noexcept { return spec_.length / double(spec_.points); }
  double eigen_residual() const noexcept { return residual_; }

  /// <q1 q2| exp(-beta H) |p1 p2>; positions must be grid nodes.
  OracleValue imaginary_time_element(double beta, double q1, double q2, double p1,
                                     double p2) const;

 private:
  RingSpec spec_;
  Eigen::VectorXd evals_;
  RealMatrix evecs_;
  double residual_ = 0.0;
  std::size_t node(double q) const;
};

enum class Statistics { boson, fermion };

inline double exchange_sign(Statistics s) { return s == Statistics::boson ? 1.0 : -1.0; }

/// Ideal quantum gas as a list of single-particle energies.
class SymmetrizedStateSum {
 public:
  SymmetrizedStateSum(std::vector<double> mode_energies, Statistics statistics);

  /// Free particle on a ring: p_j = 2 pi hbar j / L for |j| <= max_mode.
  static SymmetrizedStateSum ring(const RingSpec& spec, int max_mode, Statistics statistics);

  const std::vector<double>& mode_energies() const noexcept { return modes_; }
  Statistics statistics() const noexcept { return stats_; }

  /// b_k = sum over modes of exp(-k beta e).
  double boltzmann_sum(int k, double beta) const;

  /// Canonical Z_N for N = 0..n_max by the symmetric-function recursion
  ///   Z_N = (1/N) sum_k (+-1)^(k+1) b_k Z_(N-k).
  std::vector<double> canonical(double beta, int n_max) const;

  /// Same Z_N from the explicit permutation sum
  ///   Z_N = (1/N!) sum_P (+-1)^parity prod_cycles b_len.
  std::vector<double> canonical_by_permutations(double beta, int n_max) const;

  /// sum_N z^N Z_N for N <= n_max (n_max <= 4).
  double grand_partition(double z, double beta, int n_max) const;

 private:
  std::vector<double> modes_;
  Statistics stats_;
};

/// Cycle lengths of every permutation of n elements, in lexicographic order
/// of the permutations. Parity exponent = n - number of cycles.
std::vector<std::vector<int>> permutation_cycle_types(int n);

}  // namespace phaselab
