#pragma once

// A subsystem entangled with an energy reservoir. Macrostate alpha of the
// subsystem (energy E_alpha, degeneracy N_alpha) pairs with N^r_alpha
// reservoir states h; every coefficient c_{alpha g, h} has unit magnitude and
// a uniformly random phase. Reservoir states that belong to different alpha
// are orthogonal, so only same-alpha products are ever formed.
//
// Units: k_B = 1, so the temperature is an energy and S_alpha = ln N_alpha.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "phaselab/oracle.hpp"
#include "phaselab/stats.hpp"

namespace phaselab {

struct Macrostate {
  double energy = 0.0;
  int degeneracy = 1;
};

class SubsystemSpectrum {
 public:
  explicit SubsystemSpectrum(std::vector<Macrostate> levels);

  const std::vector<Macrostate>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double entropy(std::size_t alpha) const;
  std::size_t microstates() const noexcept;

 private:
  std::vector<Macrostate> levels_;
};

/// Finite stand-in for a thermal reservoir: N^r_alpha = round(M0 exp(-E_alpha / T)).
/// The additive constant of the reservoir entropy becomes ln M0.
struct ReservoirModel {
  double temperature = 1.0;
  double degeneracy_scale = 64.0;  // M0

  std::vector<std::int64_t> degeneracies(const SubsystemSpectrum& spec) const;
  /// max_alpha |N^r_alpha / (M0 exp(-E_alpha/T)) - 1|.
  double max_rounding_error(const SubsystemSpectrum& spec) const;
};

/// Per-alpha coefficient blocks, N_alpha rows by N^r_alpha columns.
struct TotalState {
  std::vector<ComplexMatrix> blocks;

  double norm_squared() const;
  std::size_t dimension() const;
};

/// Per-alpha Hermitian blocks of a subsystem operator.
struct SubsystemOperator {
  std::vector<ComplexMatrix> blocks;

  static SubsystemOperator identity(const SubsystemSpectrum& spec);
  /// Diagonal with value E_alpha on every microstate of alpha.
  static SubsystemOperator energy(const SubsystemSpectrum& spec);
  /// `diagonal[alpha]` on the diagonal and `coupling` between neighbouring
  /// microstates g, g + 1 of each block.
  static SubsystemOperator tridiagonal(const SubsystemSpectrum& spec,
                                       const std::vector<double>& diagonal, complex coupling);
  /// Throws on shape mismatch or blocks that are not Hermitian within 1e-12.
  void validate(const SubsystemSpectrum& spec) const;
};

constexpr std::size_t kDefaultDimensionCap = 10'000'000;

/// Seed of sample `index` in a run seeded by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Unit-magnitude coefficients with i.i.d. uniform phases.
TotalState sample_total_state(const SubsystemSpectrum& spec, const ReservoirModel& res,
                              std::uint64_t seed, std::size_t cap = kDefaultDimensionCap);

/// Isotropic direction in the total space (normalised complex Gaussian).
TotalState sample_uniform_state(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                std::uint64_t seed, std::size_t cap = kDefaultDimensionCap);

/// <psi|A (x) 1|psi> / <psi|psi>.
complex subsystem_expectation(const TotalState& state, const SubsystemOperator& op);

/// rho_alpha = C_alpha C_alpha^+ / ||C||^2, one block per macrostate.
std::vector<ComplexMatrix> reduced_density_matrix(const TotalState& state);

/// Frobenius norm of the entries with g != g' across all blocks.
double off_diagonal_norm(const std::vector<ComplexMatrix>& rho);

struct ConvergencePoint {
  std::uint64_t samples = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double off_diag_norm = 0.0;  // of the sample-averaged reduced density matrix
};

struct EnsembleResult {
  MonteCarloEstimate estimate;
  std::vector<ConvergencePoint> trace;
};

/// Monte Carlo over independent random-phase states. `checkpoints` are
/// sample counts at which the running values are recorded.
EnsembleResult random_phase_average(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                    const SubsystemOperator& op, std::uint64_t samples,
                                    std::uint64_t seed,
                                    const std::vector<std::uint64_t>& checkpoints = {});

/// Same estimator over isotropic states of the total space.
EnsembleResult wavespace_uniform_average(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                         const SubsystemOperator& op, std::uint64_t samples,
                                         std::uint64_t seed,
                                         const std::vector<std::uint64_t>& checkpoints = {});

/// (1/Z) sum_{alpha, g} exp(-E_alpha / T) A_{alpha g, alpha g}.
double gibbs_average(const SubsystemSpectrum& spec, double temperature,
                     const SubsystemOperator& op);

/// Exact limit of both estimators for the rounded reservoir degeneracies:
/// sum_alpha N^r_alpha tr A_alpha / sum_alpha N^r_alpha N_alpha.
double reservoir_limit(const SubsystemSpectrum& spec, const ReservoirModel& res,
                       const SubsystemOperator& op);

/// Columns: samples, mean, stderr, off_diag_norm.
void write_trace_csv(std::ostream& os, const std::vector<ConvergencePoint>& trace);

}  // namespace phaselab
