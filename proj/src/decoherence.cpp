#include "phaselab/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "phaselab/format.hpp"

namespace phaselab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::int64_t> checked_degeneracies(const SubsystemSpectrum& spec,
                                               const ReservoirModel& res, std::size_t cap) {
  const auto nr = res.degeneracies(spec);
  double dim = 0.0;
  for (std::size_t a = 0; a < spec.size(); ++a)
    dim += double(spec.levels()[a].degeneracy) * double(nr[a]);
  if (dim > double(cap))
    throw std::length_error("total dimension " + format_number(dim) + " exceeds the cap " +
                            std::to_string(cap));
  return nr;
}

template <typename Draw>
TotalState fill_state(const SubsystemSpectrum& spec, const std::vector<std::int64_t>& nr,
                      Draw&& draw) {
  TotalState s;
  s.blocks.reserve(spec.size());
  for (std::size_t a = 0; a < spec.size(); ++a) {
    ComplexMatrix c(spec.levels()[a].degeneracy, nr[a]);
    // Column-major fill keeps the draw order fixed: h outer, g inner.
    for (Eigen::Index h = 0; h < c.cols(); ++h)
      for (Eigen::Index g = 0; g < c.rows(); ++g) c(g, h) = draw();
    s.blocks.push_back(std::move(c));
  }
  return s;
}

template <typename Sampler>
EnsembleResult run_ensemble(const SubsystemSpectrum& spec, const SubsystemOperator& op,
                            std::uint64_t samples, std::uint64_t seed,
                            const std::vector<std::uint64_t>& checkpoints, Sampler&& sample) {
  if (samples < 2) throw std::invalid_argument("Monte Carlo needs at least 2 samples");
  op.validate(spec);
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("checkpoints must be ascending");
  RunningStats stats;
  std::vector<ComplexMatrix> rho_sum;
  for (const auto& l : spec.levels())
    rho_sum.push_back(ComplexMatrix::Zero(l.degeneracy, l.degeneracy));
  EnsembleResult out;
  auto next = checkpoints.begin();
  for (std::uint64_t m = 0; m < samples; ++m) {
    const TotalState s = sample(derive_seed(seed, m));
    stats.add(subsystem_expectation(s, op).real());
    if (!checkpoints.empty()) {
      const auto rho = reduced_density_matrix(s);
      for (std::size_t a = 0; a < rho.size(); ++a) rho_sum[a] += rho[a];
      while (next != checkpoints.end() && *next == m + 1) {
        std::vector<ComplexMatrix> avg;
        for (const auto& r : rho_sum) avg.push_back(r / double(m + 1));
        const auto e = stats.estimate();
        out.trace.push_back({m + 1, e.mean, e.std_error, off_diagonal_norm(avg)});
        ++next;
      }
    }
  }
  out.estimate = stats.estimate();
  return out;
}

}  // namespace

SubsystemSpectrum::SubsystemSpectrum(std::vector<Macrostate> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("spectrum needs at least one macrostate");
  for (const auto& l : levels_) {
    if (l.degeneracy < 1) throw std::invalid_argument("macrostate degeneracy must be >= 1");
    if (!std::isfinite(l.energy)) throw std::invalid_argument("macrostate energy must be finite");
  }
}

double SubsystemSpectrum::entropy(std::size_t alpha) const {
  return std::log(double(levels_.at(alpha).degeneracy));
}

std::size_t SubsystemSpectrum::microstates() const noexcept {
  std::size_t n = 0;
  for (const auto& l : levels_) n += std::size_t(l.degeneracy);
  return n;
}

std::vector<std::int64_t> ReservoirModel::degeneracies(const SubsystemSpectrum& spec) const {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (!(degeneracy_scale > 0.0)) throw std::invalid_argument("degeneracy scale must be > 0");
  std::vector<std::int64_t> out;
  for (const auto& l : spec.levels()) {
    const double n = std::round(degeneracy_scale * std::exp(-l.energy / temperature));
    if (!(n >= 1.0))
      throw std::invalid_argument("reservoir degeneracy rounds below 1 at E = " +
                                  format_number(l.energy) + "; raise the degeneracy scale");
    if (n > 9.0e15) throw std::length_error("reservoir degeneracy overflows");
    out.push_back(std::int64_t(n));
  }
  return out;
}

double ReservoirModel::max_rounding_error(const SubsystemSpectrum& spec) const {
  const auto nr = degeneracies(spec);
  double worst = 0.0;
  for (std::size_t a = 0; a < spec.size(); ++a) {
    const double exact = degeneracy_scale * std::exp(-spec.levels()[a].energy / temperature);
    worst = std::max(worst, std::abs(double(nr[a]) / exact - 1.0));
  }
  return worst;
}

double TotalState::norm_squared() const {
  CompensatedSum<double> s;
  for (const auto& b : blocks) s.add(b.squaredNorm());
  return s.value();
}

std::size_t TotalState::dimension() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += std::size_t(b.size());
  return n;
}

SubsystemOperator SubsystemOperator::identity(const SubsystemSpectrum& spec) {
  SubsystemOperator op;
  for (const auto& l : spec.levels())
    op.blocks.push_back(ComplexMatrix::Identity(l.degeneracy, l.degeneracy));
  return op;
}

SubsystemOperator SubsystemOperator::energy(const SubsystemSpectrum& spec) {
  std::vector<double> e;
  for (const auto& l : spec.levels()) e.push_back(l.energy);
  return tridiagonal(spec, e, 0.0);
}

SubsystemOperator SubsystemOperator::tridiagonal(const SubsystemSpectrum& spec,
                                                 const std::vector<double>& diagonal,
                                                 complex coupling) {
  if (diagonal.size() != spec.size())
    throw std::invalid_argument("one diagonal value per macrostate required");
  SubsystemOperator op;
  for (std::size_t a = 0; a < spec.size(); ++a) {
    const int n = spec.levels()[a].degeneracy;
    ComplexMatrix m = diagonal[a] * ComplexMatrix::Identity(n, n);
    for (int g = 0; g + 1 < n; ++g) {
      m(g, g + 1) = coupling;
      m(g + 1, g) = std::conj(coupling);
    }
    op.blocks.push_back(std::move(m));
  }
  return op;
}

void SubsystemOperator::validate(const SubsystemSpectrum& spec) const {
  if (blocks.size() != spec.size())
    throw std::invalid_argument("operator has " + std::to_string(blocks.size()) +
                                " blocks, spectrum has " + std::to_string(spec.size()));
  for (std::size_t a = 0; a < spec.size(); ++a) {
    const int n = spec.levels()[a].degeneracy;
    if (blocks[a].rows() != n || blocks[a].cols() != n)
      throw std::invalid_argument("operator block " + std::to_string(a) +
                                  " does not match the macrostate degeneracy");
    require_hermitian(blocks[a], 1e-12);
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

TotalState sample_total_state(const SubsystemSpectrum& spec, const ReservoirModel& res,
                              std::uint64_t seed, std::size_t cap) {
  const auto nr = checked_degeneracies(spec, res, cap);
  std::mt19937_64 rng(seed);
  return fill_state(spec, nr, [&] { return std::polar(1.0, kTwoPi * unit_uniform(rng)); });
}

TotalState sample_uniform_state(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                std::uint64_t seed, std::size_t cap) {
  const auto nr = checked_degeneracies(spec, res, cap);
  std::mt19937_64 rng(seed);
  TotalState s = fill_state(spec, nr, [&] { return gaussian_pair(rng); });
  const double n = std::sqrt(s.norm_squared());
  for (auto& b : s.blocks) b /= n;
  return s;
}

complex subsystem_expectation(const TotalState& state, const SubsystemOperator& op) {
  if (op.blocks.size() != state.blocks.size())
    throw std::invalid_argument("operator and state have different macrostate counts");
  CompensatedSum<complex> s;
  for (std::size_t a = 0; a < state.blocks.size(); ++a) {
    const auto& c = state.blocks[a];
    if (op.blocks[a].rows() != c.rows())
      throw std::invalid_argument("operator block does not match the state block");
    // sum_{g', g} A_{g' g} sum_h conj(c_{g' h}) c_{g h}
    s.add((c.adjoint() * op.blocks[a] * c).trace());
  }
  return s.value() / state.norm_squared();
}

std::vector<ComplexMatrix> reduced_density_matrix(const TotalState& state) {
  const double n = state.norm_squared();
  std::vector<ComplexMatrix> rho;
  for (const auto& c : state.blocks) rho.push_back(c * c.adjoint() / n);
  return rho;
}

double off_diagonal_norm(const std::vector<ComplexMatrix>& rho) {
  double s = 0.0;
  for (const auto& r : rho)
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      for (Eigen::Index j = 0; j < r.cols(); ++j)
        if (i != j) s += std::norm(r(i, j));
  return std::sqrt(s);
}

EnsembleResult random_phase_average(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                    const SubsystemOperator& op, std::uint64_t samples,
                                    std::uint64_t seed,
                                    const std::vector<std::uint64_t>& checkpoints) {
  checked_degeneracies(spec, res, kDefaultDimensionCap);
  return run_ensemble(spec, op, samples, seed, checkpoints,
                      [&](std::uint64_t s) { return sample_total_state(spec, res, s); });
}

EnsembleResult wavespace_uniform_average(const SubsystemSpectrum& spec, const ReservoirModel& res,
                                         const SubsystemOperator& op, std::uint64_t samples,
                                         std::uint64_t seed,
                                         const std::vector<std::uint64_t>& checkpoints) {
  checked_degeneracies(spec, res, kDefaultDimensionCap);
  // Decorrelate from the random-phase stream for the same seed.
  const std::uint64_t base = splitmix64(seed ^ 0xA5A5A5A5A5A5A5A5ull);
  return run_ensemble(spec, op, samples, base, checkpoints,
                      [&](std::uint64_t s) { return sample_uniform_state(spec, res, s); });
}

double gibbs_average(const SubsystemSpectrum& spec, double temperature,
                     const SubsystemOperator& op) {
  op.validate(spec);
  double emin = spec.levels().front().energy;
  for (const auto& l : spec.levels()) emin = std::min(emin, l.energy);
  CompensatedSum<double> z, num;
  for (std::size_t a = 0; a < spec.size(); ++a) {
    const double w = std::exp(-(spec.levels()[a].energy - emin) / temperature);
    for (Eigen::Index g = 0; g < op.blocks[a].rows(); ++g) {
      z.add(w);
      num.add(w * op.blocks[a](g, g).real());
    }
  }
  return num.value() / z.value();
}

double reservoir_limit(const SubsystemSpectrum& spec, const ReservoirModel& res,
                       const SubsystemOperator& op) {
  op.validate(spec);
  const auto nr = res.degeneracies(spec);
  CompensatedSum<double> num, den;
  for (std::size_t a = 0; a < spec.size(); ++a) {
    num.add(double(nr[a]) * op.blocks[a].trace().real());
    den.add(double(nr[a]) * double(spec.levels()[a].degeneracy));
  }
  return num.value() / den.value();
}

void write_trace_csv(std::ostream& os, const std::vector<ConvergencePoint>& trace) {
  os << "samples,mean,stderr,off_diag_norm\n";
  for (const auto& p : trace)
    os << p.samples << ',' << format_number(p.mean) << ',' << format_number(p.std_error) << ','
       << format_number(p.off_diag_norm) << '\n';
}

}  // namespace phaselab
