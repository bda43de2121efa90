#include "phaselab/phase_grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "phaselab/format.hpp"
#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {

int lattice_count(Range r, double spacing, const char* axis) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.max < r.min)
    throw std::invalid_argument(std::string(axis) + " range is empty");
  return static_cast<int>(std::floor((r.max - r.min) / spacing + 1e-9)) + 1;
}

}  // namespace

PhaseGrid::PhaseGrid(double xi, double hbar, double dq, double dp, Range q_range,
                     Range p_range, int dims, int n_particles)
    : xi_(xi), hbar_(hbar), dq_(dq), dp_(dp), q_range_(q_range), p_range_(p_range),
      dims_(dims), n_particles_(n_particles) {
  if (!(xi > 0.0) || !(hbar > 0.0)) throw std::invalid_argument("xi and hbar must be > 0");
  if (!(dq > 0.0) || !(dp > 0.0)) throw std::invalid_argument("dq and dp must be > 0");
  if (dims < 1 || n_particles < 1)
    throw std::invalid_argument("phase grid needs dims >= 1 and n_particles >= 1");
  nq_ = lattice_count(q_range, dq, "q");
  np_ = lattice_count(p_range, dp, "p");
}

PhaseGrid PhaseGrid::balanced(double xi, double hbar, Range q_range, Range p_range) {
  return PhaseGrid(xi, hbar, 10.0 * xi, 10.0 * hbar / xi, q_range, p_range);
}

std::size_t PhaseGrid::size() const noexcept {
  std::size_t per = static_cast<std::size_t>(nq_) * static_cast<std::size_t>(np_);
  std::size_t n = 1;
  for (std::size_t k = 0; k < coordinates(); ++k) n *= per;
  return n;
}

std::vector<LatticeIndex> PhaseGrid::index(std::size_t flat) const {
  const std::size_t per = static_cast<std::size_t>(nq_) * static_cast<std::size_t>(np_);
  std::vector<LatticeIndex> out(coordinates());
  for (std::size_t k = coordinates(); k-- > 0;) {
    const std::size_t local = flat % per;
    flat /= per;
    out[k].iq = static_cast<int>(local / static_cast<std::size_t>(np_));
    out[k].ip = static_cast<int>(local % static_cast<std::size_t>(np_));
  }
  return out;
}

std::vector<WavePacket> PhaseGrid::enumerate_packets() const {
  std::vector<WavePacket> packets;
  packets.reserve(size());
  for (std::size_t flat = 0; flat < size(); ++flat) {
    const auto idx = index(flat);
    std::vector<double> p(idx.size()), q(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      p[k] = p_label(idx[k].ip);
      q[k] = q_label(idx[k].iq);
    }
    packets.emplace_back(xi_, std::move(p), std::move(q), hbar_, n_particles_, dims_);
  }
  return packets;
}

std::vector<std::string> PhaseGrid::diagnostics() const {
  std::vector<std::string> out;
  if (nq_ > 1 && dq_ < 2.0 * xi_) {
    std::ostringstream os;
    os << "dq = " << dq_ << " is below 2 xi = " << 2.0 * xi_
       << "; packets overlap strongly (delta regime needs dq >> 2 xi)";
    out.push_back(os.str());
  }
  if (np_ > 1 && dp_ < hbar_ / xi_) {
    std::ostringstream os;
    os << "dp = " << dp_ << " is below hbar/xi = " << hbar_ / xi_
       << "; packets overlap strongly (delta regime needs dp >> hbar/xi)";
    out.push_back(os.str());
  }
  return out;
}

GridWaveFunction::GridWaveFunction(PositionGrid grid, std::vector<complex> samples)
    : grid_(std::move(grid)), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw std::invalid_argument("wave function sample count does not match its grid");
}

GridWaveFunction GridWaveFunction::zero(PositionGrid grid) {
  std::vector<complex> s(grid.size(), 0.0);
  return GridWaveFunction(std::move(grid), std::move(s));
}

GridWaveFunction GridWaveFunction::from_packet(const WavePacket& packet,
                                               const PositionGrid& grid) {
  if (packet.coordinates() != 1)
    throw std::invalid_argument("grid wave functions are one-dimensional");
  return GridWaveFunction(grid, packet.sample_factor(0, grid));
}

GridWaveFunction GridWaveFunction::superposition(std::span<const WavePacket> packets,
                                                 std::span<const complex> amplitudes,
                                                 const PositionGrid& grid) {
  if (packets.size() != amplitudes.size())
    throw std::invalid_argument("one amplitude per packet required");
  std::vector<complex> s(grid.size(), 0.0);
  for (std::size_t j = 0; j < packets.size(); ++j) {
    if (packets[j].coordinates() != 1)
      throw std::invalid_argument("grid wave functions are one-dimensional");
    for (std::size_t i = 0; i < grid.size(); ++i)
      s[i] += amplitudes[j] * packets[j].factor(0, grid.x(i));
  }
  return GridWaveFunction(grid, std::move(s));
}

double GridWaveFunction::norm() const { return std::sqrt(norm_squared()); }

GridWaveFunction GridWaveFunction::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero wave function");
  return scaled(1.0 / n);
}

complex GridWaveFunction::inner(const GridWaveFunction& other) const {
  if (!grid_.same_as(other.grid_)) throw std::invalid_argument("wave functions on different grids");
  return grid_.inner(samples_, other.samples_);
}

GridWaveFunction GridWaveFunction::scaled(complex factor) const {
  std::vector<complex> s(samples_);
  for (auto& v : s) v *= factor;
  return GridWaveFunction(grid_, std::move(s));
}

GridWaveFunction GridWaveFunction::plus(const GridWaveFunction& other) const {
  if (!grid_.same_as(other.grid_)) throw std::invalid_argument("wave functions on different grids");
  std::vector<complex> s(samples_);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += other.samples_[i];
  return GridWaveFunction(grid_, std::move(s));
}

double fidelity(const GridWaveFunction& a, const GridWaveFunction& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::abs(a.inner(b)) / (na * nb);
}

complex ProjectionCoefficients::at(int ip, int iq) const {
  if (grid.coordinates() != 1) throw std::invalid_argument("at() needs a one-coordinate grid");
  if (ip < 0 || iq < 0 || ip >= grid.np() || iq >= grid.nq())
    throw std::out_of_range("lattice index out of range");
  return coeffs[static_cast<std::size_t>(iq) * static_cast<std::size_t>(grid.np()) +
                static_cast<std::size_t>(ip)];
}

double ProjectionCoefficients::sum_squared() const {
  CompensatedSum<double> s;
  for (const auto& c : coeffs) s.add(std::norm(c));
  return s.value();
}

void ProjectionCoefficients::write_csv(std::ostream& os) const {
  os << "ip,iq,p,q,re,im\n";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const auto idx = grid.index(k).front();
    os << idx.ip << ',' << idx.iq << ',' << format_number(grid.p_label(idx.ip)) << ','
       << format_number(grid.q_label(idx.iq)) << ',' << format_number(coeffs[k].real()) << ','
       << format_number(coeffs[k].imag()) << '\n';
  }
}

ProjectionCoefficients project(const GridWaveFunction& psi, const PhaseGrid& grid) {
  if (grid.coordinates() != 1)
    throw std::invalid_argument("projection is implemented for one coordinate (d = N = 1)");
  const auto packets = grid.enumerate_packets();
  require_compliant(psi.grid(), packets);
  ProjectionCoefficients out{grid, psi.grid(), {}};
  out.coeffs.reserve(packets.size());
  for (const auto& packet : packets)
    out.coeffs.push_back(psi.grid().inner(packet.sample_factor(0, psi.grid()), psi.samples()));
  return out;
}

GridWaveFunction reconstruct(const ProjectionCoefficients& coeffs) {
  if (coeffs.grid.coordinates() != 1)
    throw std::invalid_argument("reconstruction is implemented for one coordinate");
  const auto packets = coeffs.grid.enumerate_packets();
  if (packets.size() != coeffs.coeffs.size())
    throw std::invalid_argument("coefficient count does not match lattice size");
  return GridWaveFunction::superposition(packets, coeffs.coeffs, coeffs.positions);
}

ProjectionSummary summarize_projection(const GridWaveFunction& psi,
                                       const ProjectionCoefficients& coeffs) {
  const auto rec = reconstruct(coeffs);
  ProjectionSummary s;
  s.input_norm_squared = psi.norm_squared();
  s.coefficient_sum_squared = coeffs.sum_squared();
  s.reconstruction_norm_squared = rec.norm_squared();
  s.fidelity = fidelity(psi, rec);
  if (s.input_norm_squared > 0.0)
    s.leaked_norm = std::max(0.0, 1.0 - s.reconstruction_norm_squared / s.input_norm_squared);
  return s;
}

PhaseGrid covering_grid(const GridWaveFunction& psi, double xi, double hbar, double dq,
                        double dp, double threshold) {
  const auto& g = psi.grid();
  double peak = 0.0;
  for (const auto& v : psi.samples()) peak = std::max(peak, std::norm(v));
  if (!(peak > 0.0)) throw std::invalid_argument("cannot cover the support of a zero wave function");
  double qlo = INFINITY, qhi = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::norm(psi.samples()[i]) > threshold * peak) {
      qlo = std::min(qlo, g.x(i));
      qhi = std::max(qhi, g.x(i));
    }

  const auto k = dft_wavenumbers(g.size(), g.step());
  const auto power = power_spectrum(psi.samples());
  const double ppeak = *std::max_element(power.begin(), power.end());
  double plo = INFINITY, phi = -INFINITY;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (power[j] > threshold * ppeak) {
      plo = std::min(plo, hbar * k[j]);
      phi = std::max(phi, hbar * k[j]);
    }

  const double sigma_p = hbar / (2.0 * xi);
  return PhaseGrid(xi, hbar, dq, dp, {qlo - 6.0 * xi, qhi + 6.0 * xi},
                   {plo - 6.0 * sigma_p, phi + 6.0 * sigma_p});
}

}  // namespace phaselab
