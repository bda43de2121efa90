#include "phaselab/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "phaselab/format.hpp"
#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {

double polynomial_value(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

std::string polynomial_name(const std::vector<double>& pc, const std::vector<double>& qc) {
  std::string out;
  auto add = [&](const std::vector<double>& c, const char* var) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == 0.0) continue;
      if (!out.empty()) out += " + ";
      out += format_number(c[k]);
      if (k > 0) out += std::string("*") + var + (k > 1 ? "^" + std::to_string(k) : "");
    }
  };
  add(pc, "p");
  add(qc, "q");
  return out.empty() ? "0" : out;
}

}  // namespace

Observable Observable::separable(Function momentum_part, Function position_part,
                                 std::string name) {
  Observable o;
  o.kind_ = Kind::phase_function;
  o.name_ = std::move(name);
  o.momentum_part_ = std::move(momentum_part);
  o.position_part_ = std::move(position_part);
  return o;
}

Observable Observable::polynomial(std::vector<double> p_coeffs, std::vector<double> q_coeffs) {
  std::string name = polynomial_name(p_coeffs, q_coeffs);
  Function f, g;
  if (!p_coeffs.empty()) f = [c = p_coeffs](double p) { return polynomial_value(c, p); };
  if (!q_coeffs.empty()) g = [c = q_coeffs](double q) { return polynomial_value(c, q); };
  return separable(std::move(f), std::move(g), std::move(name));
}

Observable Observable::identity() { return constant(1.0); }

Observable Observable::constant(double c) {
  return separable({}, [c](double) { return c; }, format_number(c));
}

Observable Observable::position() {
  return separable({}, [](double q) { return q; }, "q");
}

Observable Observable::grid_operator(ComplexMatrix matrix, PositionGrid grid, std::string name) {
  if (matrix.rows() != Eigen::Index(grid.size()) || matrix.cols() != Eigen::Index(grid.size()))
    throw std::invalid_argument("operator matrix does not match its position grid");
  require_hermitian(matrix, 1e-12);
  Observable o;
  o.kind_ = Kind::grid_operator;
  o.name_ = std::move(name);
  o.matrix_ = std::make_shared<const ComplexMatrix>(std::move(matrix));
  o.grid_ = std::make_shared<const PositionGrid>(std::move(grid));
  return o;
}

double Observable::operator()(double p, double q) const {
  if (kind_ != Kind::phase_function)
    throw std::logic_error("grid operators have no phase function");
  double v = 0.0;
  if (momentum_part_) v += momentum_part_(p);
  if (position_part_) v += position_part_(q);
  return v;
}

std::vector<complex> Observable::apply(std::span<const complex> samples, const PositionGrid& grid,
                                       double hbar) const {
  if (samples.size() != grid.size()) throw std::invalid_argument("sample count does not match grid");
  if (kind_ == Kind::grid_operator) {
    if (!grid_->same_as(grid))
      throw std::invalid_argument("grid operator '" + name_ + "' lives on a different grid");
    const auto n = Eigen::Index(samples.size());
    const ComplexVector v = (*matrix_) * Eigen::Map<const ComplexVector>(samples.data(), n);
    return {v.data(), v.data() + n};
  }
  std::vector<complex> out(samples.size(), 0.0);
  if (momentum_part_)
    out = apply_momentum_symbol(samples, grid.step(), hbar,
                                [f = momentum_part_](double p) { return complex(f(p)); });
  if (position_part_)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += position_part_(grid.x(i)) * samples[i];
  return out;
}

ComplexMatrix Observable::matrix(const PositionGrid& grid, double hbar) const {
  if (kind_ == Kind::grid_operator) {
    if (!grid_->same_as(grid))
      throw std::invalid_argument("grid operator '" + name_ + "' lives on a different grid");
    return *matrix_;
  }
  const std::size_t n = grid.size();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  if (momentum_part_) {
    const auto k = dft_wavenumbers(n, grid.step());
    std::vector<complex> row(n);
    for (std::size_t d = 0; d < n; ++d) {
      complex acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (n % 2 == 0 && j == n / 2) continue;
        acc += momentum_part_(hbar * k[j]) * std::polar(1.0, k[j] * grid.step() * double(d));
      }
      row[d] = acc / double(n);
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) m(a, b) = row[(a + n - b) % n];
  }
  if (position_part_)
    for (std::size_t a = 0; a < n; ++a) m(a, a) += position_part_(grid.x(a));
  return m;
}

complex matrix_element(const WavePacket& a, const WavePacket& b, const Observable& obs,
                       const PositionGrid& grid) {
  if (a.coordinates() != 1 || b.coordinates() != 1)
    throw std::invalid_argument("matrix elements are one-dimensional");
  if (!a.shares_shape_with(b))
    throw std::invalid_argument("packets must share xi, hbar, n_particles and dims");
  const WavePacket pair[] = {a, b};
  require_compliant(grid, pair);
  const auto sa = a.sample_factor(0, grid);
  const auto ab = obs.apply(b.sample_factor(0, grid), grid, b.hbar());
  return grid.inner(sa, ab);
}

ExpectationEngine::ExpectationEngine(const PhaseGrid& lattice, const PositionGrid& positions,
                                     Observable obs)
    : lattice_(lattice), positions_(positions), obs_(std::move(obs)) {
  if (lattice_.coordinates() != 1)
    throw std::invalid_argument("expectation engine is implemented for one coordinate");
  const auto packets = lattice_.enumerate_packets();
  require_compliant(positions_, packets);
  const auto n = Eigen::Index(packets.size());
  const auto np = Eigen::Index(lattice_.np());
  const int nq = lattice_.nq();
  elements_ = ComplexMatrix::Zero(n, n);

  // A packet is below e^-36 in amplitude beyond 12 xi from its centre, so
  // each row packet only needs its own window of the position grid.
  const double reach = 12.0 * lattice_.xi();
  const double h = positions_.step();
  auto window = [&](double q) {
    const auto lo = Eigen::Index(std::max(0.0, std::floor((q - reach - positions_.start()) / h)));
    const auto hi = std::min(Eigen::Index(positions_.size()),
                             Eigen::Index(std::ceil((q + reach - positions_.start()) / h)) + 1);
    return std::pair{lo, hi};
  };
  std::vector<ComplexMatrix> rows(nq);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> windows(nq);
  for (int iq = 0; iq < nq; ++iq) {
    windows[iq] = window(lattice_.q_label(iq));
    const auto [lo, hi] = windows[iq];
    rows[iq].resize(hi - lo, np);
    for (Eigen::Index ip = 0; ip < np; ++ip) {
      const auto& packet = packets[iq * np + ip];
      for (Eigen::Index i = lo; i < hi; ++i)
        rows[iq](i - lo, ip) = positions_.weights()[i] * packet.factor(0, positions_.x(i));
    }
  }
  ComplexMatrix applied(positions_.size(), np);
  for (int jq = 0; jq < nq; ++jq) {
    double inside = 0.0, outside = 0.0;
    const auto [jlo, jhi] = windows[jq];
    for (Eigen::Index jp = 0; jp < np; ++jp) {
      const auto as = obs_.apply(packets[jq * np + jp].sample_factor(0, positions_), positions_,
                                 lattice_.hbar());
      for (Eigen::Index i = 0; i < applied.rows(); ++i) {
        applied(i, jp) = as[i];
        (i >= jlo && i < jhi ? inside : outside) =
            std::max(i >= jlo && i < jhi ? inside : outside, std::abs(as[i]));
      }
    }
    // Pairs further apart than two windows vanish only if A keeps the
    // column local.
    const bool local = outside <= 1e-16 * inside;
    for (int iq = 0; iq < nq; ++iq) {
      if (local && std::abs(lattice_.q_label(iq) - lattice_.q_label(jq)) > 2.0 * reach) continue;
      const auto [lo, hi] = windows[iq];
      elements_.block(iq * np, jq * np, np, np).noalias() =
          rows[iq].adjoint() * applied.middleRows(lo, hi - lo);
    }
  }
  classical_values_.resize(packets.size());
  for (std::size_t j = 0; j < packets.size(); ++j)
    classical_values_[j] = obs_.kind() == Observable::Kind::phase_function
                               ? obs_(packets[j].p()[0], packets[j].q()[0])
                               : elements_(j, j).real();
}

ExpectationReport ExpectationEngine::evaluate(const ProjectionCoefficients& coeffs,
                                              double floor) const {
  ExpectationReport r;
  if (coeffs.coeffs.empty()) return r;
  const auto& c = coeffs.coeffs;
  if (c.size() != std::size_t(elements_.rows()) || coeffs.grid.nq() != lattice_.nq() ||
      coeffs.grid.np() != lattice_.np() || coeffs.grid.dq() != lattice_.dq() ||
      coeffs.grid.dp() != lattice_.dp() || coeffs.grid.q_range().min != lattice_.q_range().min ||
      coeffs.grid.p_range().min != lattice_.p_range().min)
    throw std::invalid_argument("coefficients were projected on a different lattice");
  CompensatedSum<complex> diag, full;
  CompensatedSum<double> classical;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const complex term = std::conj(c[i]) * c[j] * elements_(i, j);
      full.add(term);
      if (i == j) diag.add(term);
    }
    classical.add(std::norm(c[i]) * classical_values_[i]);
  }
  r.total = full.value().real();
  r.diagonal = diag.value().real();
  // Defined as the difference so the split is exact in floating point.
  r.off_diagonal = r.total - r.diagonal;
  r.imaginary_residue = full.value().imag();
  r.relative_off_diagonal = std::abs(r.off_diagonal) / std::max(std::abs(r.total), floor);
  r.classical = classical.value();
  r.lattice_size = c.size();
  return r;
}

ExpectationReport expectation_full(const ProjectionCoefficients& coeffs, const Observable& obs,
                                   double floor) {
  if (coeffs.coeffs.empty()) return {};
  return ExpectationEngine(coeffs.grid, coeffs.positions, obs).evaluate(coeffs, floor);
}

GridWaveFunction zero_padded(const GridWaveFunction& psi, double lo, double hi) {
  const auto& g = psi.grid();
  const double h = g.step();
  const auto before = std::size_t(std::max(0.0, std::ceil((g.start() - lo) / h - 1e-9)));
  auto after = std::size_t(std::max(0.0, std::ceil((hi - g.stop()) / h - 1e-9)));
  // Keep the point count odd.
  if ((before + after) % 2 == 1) ++after;
  if (before == 0 && after == 0) return psi;
  std::vector<complex> s(before + g.size() + after, 0.0);
  std::copy(psi.samples().begin(), psi.samples().end(), s.begin() + long(before));
  PositionGrid grid(g.start() - h * double(before), h, s.size());
  return GridWaveFunction(std::move(grid), std::move(s));
}

std::vector<SweepRow> suppression_sweep(const GridWaveFunction& psi, const Observable& obs,
                                        double xi, double hbar,
                                        const std::vector<std::pair<double, double>>& spacings,
                                        double floor) {
  for (std::size_t k = 1; k < spacings.size(); ++k)
    if (spacings[k].first * spacings[k].second < spacings[k - 1].first * spacings[k - 1].second)
      throw std::invalid_argument("spacings must be sorted ascending in dq * dp");
  std::vector<SweepRow> rows;
  for (const auto& [dq, dp] : spacings) {
    const PhaseGrid lattice = covering_grid(psi, xi, hbar, dq, dp);
    const double margin = 10.0 * xi;
    const auto wide = zero_padded(psi, lattice.q_label(0) - margin,
                                  lattice.q_label(lattice.nq() - 1) + margin);
    const auto coeffs = project(wide, lattice);
    rows.push_back({dq, dp, ExpectationEngine(lattice, wide.grid(), obs).evaluate(coeffs, floor)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "dq,dp,total,diagonal,off_diagonal,relative_off_diagonal\n";
  for (const auto& r : rows)
    os << format_number(r.dq) << ',' << format_number(r.dp) << ',' << format_number(r.report.total)
       << ',' << format_number(r.report.diagonal) << ',' << format_number(r.report.off_diagonal)
       << ',' << format_number(r.report.relative_off_diagonal) << '\n';
}

SlowVariationReport check_slowly_varying(const Observable& obs, const PhaseGrid& lattice,
                                         double floor) {
  if (obs.kind() != Observable::Kind::phase_function)
    throw std::invalid_argument("slow-variation check needs a phase function");
  SlowVariationReport r;
  auto test = [&](double a, double b) {
    const double ratio = std::abs(b - a) / (0.1 * std::abs(a) + floor);
    ++r.checked;
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (ratio > 1.0) ++r.violations;
  };
  for (int iq = 0; iq < lattice.nq(); ++iq)
    for (int ip = 0; ip < lattice.np(); ++ip) {
      const double p = lattice.p_label(ip), q = lattice.q_label(iq);
      const double a = obs(p, q);
      test(a, obs(p + lattice.dp(), q));
      test(a, obs(p, q + lattice.dq()));
    }
  return r;
}

}  // namespace phaselab
