#pragma once

// Grand-canonical statistics written as classical phase-space integrals
// (d = 1, periodic box [0, L)):
//
//   Xi = sum_N z^N / (h^N N!) int dGamma exp(-beta H) W eta
//   <A> = (1/Xi) sum_N z^N / (h^N N!) int dGamma exp(-beta H) A W_A eta
//
// with exp(-beta H) W = <q|exp(-beta H)|p> / <q|p>,
// eta = sum_P (+-1)^parity exp(-i ((P p) - p).q / hbar), and momenta on the
// lattice 2 pi hbar j / L. For a one-body Hamiltonian every permutation
// factorises over its cycles, and a cycle of length l contributes
// Tr M^l with M_{p'p} = (1/L) int dq exp(-beta H(p,q)) W(p,q) exp(-i (p'-p) q / hbar).
// The q integral is done by composite Simpson on the oracle grid.
//
// The word "parity exponent" below is the permutation parity, not momentum.

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "phaselab/oracle.hpp"

namespace phaselab {

struct PhasePoint {
  std::vector<double> p;
  std::vector<double> q;
};

struct ModelSystem {
  int n_particles = 1;
  double box_length = 7.5;
  double mass = 1.0;
  double hbar = 1.0;
  double beta = 1.0;
  double fugacity = 1.0;
  Potential potential;                  // external, one-body; empty is the ideal gas
  std::function<double(double)> pair;  // pair potential of the separation (two-particle W only)
  std::size_t grid_points = 256;       // oracle grid and q quadrature
  std::size_t pair_grid_points = 64;   // per particle, two-particle oracle

  void validate() const;
  double volume() const noexcept { return box_length; }
  double planck() const noexcept;
  double momentum_spacing() const noexcept;
  /// h sqrt(beta / 2 pi m).
  double thermal_wavelength() const noexcept;
  double hamiltonian(const PhasePoint& point) const;
};

struct SymmetrizationValue {
  complex value;
  Statistics sign = Statistics::boson;
};

struct CommutationValue {
  complex value;
  bool defined = true;         // false where A(p, q) = 0
  std::string observable_tag;  // empty for W
};

/// A = constant + sum_j (f(p_j) + g(q_j)) with polynomial f and g.
struct PhaseObservable {
  double constant = 0.0;
  std::vector<double> p_coeffs;
  std::vector<double> q_coeffs;
  std::string tag;

  static PhaseObservable unit();
  static PhaseObservable number();
  static PhaseObservable momentum_squared();
  static PhaseObservable position_squared();

  double one_body(double p, double q) const;
  double operator()(const PhasePoint& point) const;
  bool has_position_part() const noexcept;
  bool has_momentum_part() const noexcept;
};

enum class Route {
  plain,      // exp(-beta H) A W_A from <q|exp(-beta H) A|p>
  symmetric,  // (1/2) Re{ <q|exp(-beta H) A + A exp(-beta H)|p> / <q|p> eta }
  replaced,   // W_A replaced by W
  classical,  // W = eta = 1
};

struct CycleClass {
  int n = 0;
  std::vector<int> cycles;  // lengths, descending
  int permutations = 0;
  complex per_permutation;  // (+-1)^parity prod_cycles Tr M^l, same for every member
};

struct PartitionResult {
  double value = 0.0;
  double imaginary_residue = 0.0;  // |Im| / |Re|
  std::vector<double> terms;       // z^N Xi_N for N = 0..n_max
  std::vector<CycleClass> classes;
  std::vector<std::string> warnings;
};

struct AverageResult {
  double value = 0.0;
  double imaginary_residue = 0.0;
  double partition = 0.0;
  std::vector<std::string> warnings;
};

class PhaseSpaceModel {
 public:
  explicit PhaseSpaceModel(ModelSystem sys);

  const ModelSystem& system() const noexcept { return sys_; }
  const GridOperatorSet& oracle() const noexcept { return *oracle_; }

  /// Largest lattice index kept: exp(-beta p^2 / 2m) >= 1e-12.
  int momentum_cutoff() const;

  /// Explicit sum over all N! permutations (N <= 8). Momenta must lie on
  /// the lattice.
  SymmetrizationValue eta(const PhasePoint& point, Statistics sign) const;

  /// W from the dense propagator; N = 1 or 2.
  CommutationValue commutation_W(const PhasePoint& point) const;
  /// W_A; flagged undefined where A(p, q) = 0.
  CommutationValue commutation_W_A(const PhasePoint& point, const PhaseObservable& obs) const;

  /// <q|exp(-beta H) A|p> / <q|p> for the N-particle point.
  complex weighted_ratio(const PhasePoint& point, const PhaseObservable& obs, Route route) const;
  /// exp(-beta H) A W_A eta on the chosen route; real part of the symmetric form.
  complex integrand(const PhasePoint& point, Statistics sign, const PhaseObservable& obs,
                    Route route) const;
  double symmetric_integrand(const PhasePoint& point, Statistics sign,
                             const PhaseObservable& obs) const;

  /// Truncated fugacity sum on the discrete momentum lattice.
  PartitionResult grand_partition(Statistics sign, int n_max, Route route = Route::plain) const;
  /// Momentum integrals by quadrature instead of the lattice sum (ideal gas).
  PartitionResult grand_partition_continuum(Statistics sign, int n_max) const;

  AverageResult statistical_average(Statistics sign, const PhaseObservable& obs, int n_max,
                                    Route route = Route::plain) const;

 private:
  ModelSystem sys_;
  std::unique_ptr<GridOperatorSet> oracle_;
  mutable std::once_flag pair_once_;
  mutable std::unique_ptr<TwoParticleOperatorSet> pair_oracle_;

  const TwoParticleOperatorSet& pair_oracle() const;
  void require_lattice(const PhasePoint& point) const;
  complex single_ratio(double q, double p, const PhaseObservable* obs, Route route) const;
  ComplexMatrix cycle_matrix(const PhaseObservable* obs, Route route) const;
};

/// z d ln Xi / dz by central differences.
double number_from_partition(const ModelSystem& sys, Statistics sign, int n_max,
                             double relative_step = 1e-4);

}  // namespace phaselab
