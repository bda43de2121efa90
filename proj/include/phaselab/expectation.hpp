#pragma once

// Expectation values in the packet basis, split into the diagonal (classical
// mixture) part and the off-diagonal (interference) part:
//
//   <A> = sum_n |psi_n|^2 A_nn + sum_{n != m} conj(psi_n) psi_m A_nm

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "phaselab/oracle.hpp"
#include "phaselab/phase_grid.hpp"

namespace phaselab {

/// Either a separable phase function A(p, q) = f(p) + g(q), applied as
/// f(p^) + g(q^), or a Hermitian matrix acting on samples of a fixed
/// position grid.
class Observable {
 public:
  enum class Kind { phase_function, grid_operator };
  using Function = std::function<double(double)>;

  static Observable separable(Function momentum_part, Function position_part, std::string name);
  /// A = sum_k p_coeffs[k] p^k + sum_k q_coeffs[k] q^k.
  static Observable polynomial(std::vector<double> p_coeffs, std::vector<double> q_coeffs);
  static Observable identity();
  static Observable constant(double c);
  static Observable position();
  /// Throws ComplianceError("hermiticity") unless Hermitian within 1e-12.
  static Observable grid_operator(ComplexMatrix matrix, PositionGrid grid, std::string name);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  /// A(p, q). Only for phase functions.
  double operator()(double p, double q) const;
  /// Samples of A applied to `samples` on `grid`.
  std::vector<complex> apply(std::span<const complex> samples, const PositionGrid& grid,
                             double hbar) const;
  /// Dense matrix of the operator on `grid`.
  ComplexMatrix matrix(const PositionGrid& grid, double hbar) const;

 private:
  Kind kind_ = Kind::phase_function;
  std::string name_;
  Function momentum_part_, position_part_;
  std::shared_ptr<const ComplexMatrix> matrix_;
  std::shared_ptr<const PositionGrid> grid_;
};

/// <a| A |b> by quadrature on `grid`.
complex matrix_element(const WavePacket& a, const WavePacket& b, const Observable& obs,
                       const PositionGrid& grid);

struct ExpectationReport {
  double total = 0.0;
  double diagonal = 0.0;      // sum |psi_n|^2 <phi_n|A|phi_n>
  double off_diagonal = 0.0;  // total - diagonal, signed
  double relative_off_diagonal = 0.0;  // |off| / max(|total|, floor)
  double imaginary_residue = 0.0;      // Im of the full double sum
  /// sum |psi_n|^2 A(p_n, q_n) for phase functions, otherwise equal to diagonal.
  double classical = 0.0;
  std::size_t lattice_size = 0;
};

/// Caches the lattice matrix elements <phi_n|A|phi_m> for one observable.
/// Built once; evaluate() is safe to call concurrently.
class ExpectationEngine {
 public:
  ExpectationEngine(const PhaseGrid& lattice, const PositionGrid& positions, Observable obs);

  const ComplexMatrix& elements() const noexcept { return elements_; }
  ExpectationReport evaluate(const ProjectionCoefficients& coeffs, double floor = 1e-12) const;

 private:
  PhaseGrid lattice_;
  PositionGrid positions_;
  Observable obs_;
  ComplexMatrix elements_;
  std::vector<double> classical_values_;
};

ExpectationReport expectation_full(const ProjectionCoefficients& coeffs, const Observable& obs,
                                   double floor = 1e-12);

struct SweepRow {
  double dq = 0.0;
  double dp = 0.0;
  ExpectationReport report;
};

/// Projects psi onto lattices with the given spacings (sorted ascending in
/// dq * dp) and reports the split at each. The lattice covers the support of
/// psi; psi is zero-padded when the lattice packets need a wider grid.
std::vector<SweepRow> suppression_sweep(const GridWaveFunction& psi, const Observable& obs,
                                        double xi, double hbar,
                                        const std::vector<std::pair<double, double>>& spacings,
                                        double floor = 1e-12);

/// Columns: dq, dp, total, diagonal, off_diagonal, relative_off_diagonal.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct SlowVariationReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |dA| / (0.1 |A| + floor)
  bool ok() const noexcept { return violations == 0; }
};

/// Flags lattice points where |A(p + dp, q) - A(p, q)| or
/// |A(p, q + dq) - A(p, q)| exceeds 0.1 |A(p, q)| + floor.
SlowVariationReport check_slowly_varying(const Observable& obs, const PhaseGrid& lattice,
                                         double floor = 1e-12);

/// Copy of psi on a grid with the same step widened to cover [lo, hi];
/// new samples are zero.
GridWaveFunction zero_padded(const GridWaveFunction& psi, double lo, double hi);

}  // namespace phaselab
