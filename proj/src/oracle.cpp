#include "phaselab/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Signed mode index for FFT position j: 0, 1, ..., n/2 - 1, -n/2, ..., -1.
int signed_mode(std::size_t j, std::size_t n) {
  return j < n / 2 ? int(j) : int(j) - int(n);
}

void require_ring(const RingSpec& s) {
  if (!(s.length > 0.0) || !(s.mass > 0.0) || !(s.hbar > 0.0))
    throw std::invalid_argument("ring needs L, m, hbar > 0");
  if (s.points < 4 || s.points % 2 != 0)
    throw std::invalid_argument("ring grid needs an even point count >= 4");
}

// Real symmetric kinetic matrix, Nyquist mode included.
RealMatrix kinetic_matrix(const RingSpec& s) {
  const std::size_t n = s.points;
  const double dk = 2.0 * kPi / s.length;
  const double h = s.length / double(n);
  // Kinetic energy depends on a - b only; build one row of the circulant.
  std::vector<double> row(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double k = dk * signed_mode(j, n);
      acc += s.hbar * s.hbar * k * k / (2.0 * s.mass) * std::cos(k * h * double(d));
    }
    row[d] = acc / double(n);
  }
  RealMatrix t(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) t(a, b) = row[(a + n - b) % n];
  return t;
}

double eigen_residual_of(const RealMatrix& h, const Eigen::VectorXd& evals,
                         const RealMatrix& evecs) {
  const double norm = std::max(std::abs(evals.minCoeff()), std::abs(evals.maxCoeff()));
  const RealMatrix r = h * evecs - evecs * evals.asDiagonal();
  return r.colwise().norm().maxCoeff() / std::max(norm, 1e-300);
}

}  // namespace

Potential harmonic_potential(double mass, double omega, double centre) {
  return [=](double x) { return 0.5 * mass * omega * omega * (x - centre) * (x - centre); };
}

ComplexMatrix momentum_power_matrix(std::size_t n, double h, double hbar, int power) {
  const auto k = dft_wavenumbers(n, h);
  ComplexMatrix out(n, n);
  std::vector<complex> row(n);
  for (std::size_t d = 0; d < n; ++d) {
    complex acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc += std::pow(hbar * k[j], power) * std::polar(1.0, k[j] * h * double(d));
    row[d] = acc / double(n);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out(a, b) = row[(a + n - b) % n];
  return out;
}

GridOperatorSet::GridOperatorSet(RingSpec spec, Potential potential)
    : spec_(spec), has_potential_(bool(potential)) {
  require_ring(spec_);
  const std::size_t n = spec_.points;
  h_ = kinetic_matrix(spec_);
  x_ = ComplexMatrix::Zero(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    x_(a, a) = x(a);
    if (has_potential_) h_(a, a) += potential(x(a));
  }
  p_ = momentum_power_matrix(n, step(), spec_.hbar, 1);
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h_);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  evals_ = solver.eigenvalues();
  evecs_ = solver.eigenvectors();
  residual_ = eigen_residual_of(h_, evals_, evecs_);
  h_norm_ = std::max(std::abs(evals_.minCoeff()), std::abs(evals_.maxCoeff()));
}

double GridOperatorSet::lattice_momentum(int j) const {
  if (std::abs(j) >= int(spec_.points / 2))
    throw std::out_of_range("momentum index outside the grid band");
  return 2.0 * kPi * spec_.hbar * j / spec_.length;
}

int GridOperatorSet::lattice_index(double p) const {
  const double j = p * spec_.length / (2.0 * kPi * spec_.hbar);
  const double r = std::round(j);
  if (std::abs(j - r) > 1e-9 * std::max(1.0, std::abs(j)))
    throw std::invalid_argument("momentum " + std::to_string(p) +
                                " is not on the lattice 2 pi hbar n / L");
  if (std::abs(r) >= double(spec_.points / 2))
    throw std::invalid_argument("momentum " + std::to_string(p) + " is beyond the grid band");
  return int(r);
}

ComplexVector GridOperatorSet::plane_wave(double p) const {
  lattice_index(p);
  ComplexVector v(size());
  const double amp = 1.0 / std::sqrt(spec_.length);
  for (std::size_t a = 0; a < size(); ++a) v(a) = std::polar(amp, p * x(a) / spec_.hbar);
  return v;
}

RealMatrix GridOperatorSet::propagator(double beta) const {
  const Eigen::VectorXd w = (-beta * evals_.array()).exp();
  return evecs_ * w.asDiagonal() * evecs_.transpose();
}

ComplexVector GridOperatorSet::propagated_plane_wave(double beta, double p) const {
  const ComplexVector pw = plane_wave(p);
  if (beta == 0.0) return pw;
  // Lattice plane waves are exact eigenvectors of the free ring Hamiltonian.
  // Going through the eigensolver would add its noise, amplified by
  // exp(+beta E) in any ratio taken against the decayed value.
  if (free()) return std::exp(-beta * p * p / (2.0 * spec_.mass)) * pw;
  const Eigen::VectorXd w = (-beta * evals_.array()).exp();
  const ComplexVector c = evecs_.transpose().cast<complex>() * pw;
  return evecs_.cast<complex>() * (w.cast<complex>().asDiagonal() * c);
}

complex GridOperatorSet::interpolate(const ComplexVector& samples, double q) const {
  const std::size_t n = size();
  const double t = q / step();
  const double r = std::round(t);
  if (std::abs(t - r) < 1e-12) {
    const long a = ((long(r) % long(n)) + long(n)) % long(n);
    return samples(a);
  }
  const double dk = 2.0 * kPi / spec_.length;
  complex acc = 0.0;
  for (std::size_t j = 0; j <= n / 2; ++j) {
    const double k = dk * double(j);
    complex coef = 0.0;
    for (std::size_t a = 0; a < n; ++a) coef += samples(a) * std::polar(1.0, -k * x(a));
    if (j == 0) {
      acc += coef;
    } else if (j == n / 2) {
      // Split the Nyquist mode evenly between +k and -k.
      acc += coef * std::cos(k * q);
    } else {
      complex coef_neg = 0.0;
      for (std::size_t a = 0; a < n; ++a) coef_neg += samples(a) * std::polar(1.0, k * x(a));
      acc += coef * std::polar(1.0, k * q) + coef_neg * std::polar(1.0, -k * q);
    }
  }
  return acc / double(n);
}

OracleValue GridOperatorSet::imaginary_time_element(double beta, double q, double p) const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  const ComplexVector u = propagated_plane_wave(beta, p);
  OracleValue out;
  out.value = interpolate(u, q);
  const double scale = u.cwiseAbs().maxCoeff();
  out.error = scale * (double(size()) * kEps + residual_ * std::max(1.0, beta * h_norm_));
  return out;
}

RealMatrix expm(const RealMatrix& a) { return a.exp(); }

void require_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator matrix must be square");
  const double scale = a.cwiseAbs().maxCoeff();
  const double dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (dev > tol * std::max(scale, 1e-300))
    throw ComplianceError("hermiticity", "operator deviates from its adjoint by " +
                                             std::to_string(dev));
}

double dense_expectation(const GridOperatorSet& ops, const ComplexVector& psi,
                         const ComplexMatrix& obs) {
  if (psi.size() != Eigen::Index(ops.size()) || obs.rows() != psi.size())
    throw std::invalid_argument("state and operator shapes do not match the grid");
  require_hermitian(obs);
  const complex v = ops.step() * psi.dot(obs * psi);
  return v.real();
}

double dense_expectation(const PositionGrid& grid, std::span<const complex> psi,
                         const ComplexMatrix& obs, double* imag) {
  const auto n = Eigen::Index(grid.size());
  if (Eigen::Index(psi.size()) != n || obs.rows() != n || obs.cols() != n)
    throw std::invalid_argument("state and operator shapes do not match the grid");
  require_hermitian(obs);
  const ComplexVector v = Eigen::Map<const ComplexVector>(psi.data(), n);
  const ComplexVector av = obs * v;
  CompensatedSum<complex> s;
  for (Eigen::Index a = 0; a < n; ++a) s.add(grid.weights()[a] * std::conj(v(a)) * av(a));
  if (imag) *imag = s.value().imag();
  return s.value().real();
}

TwoParticleOperatorSet::TwoParticleOperatorSet(RingSpec spec, Potential external,
                                               std::function<double(double)> pair)
    : spec_(spec) {
  require_ring(spec_);
  const std::size_t n = spec_.points;
  const RealMatrix t = kinetic_matrix(spec_);
  RealMatrix h = RealMatrix::Zero(n * n, n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        // T (x) 1 couples (a, b) to (c, b); 1 (x) T couples (a, b) to (a, c).
        h(a * n + b, c * n + b) += t(a, c);
        h(a * n + b, a * n + c) += t(b, c);
      }
  const double dx = step();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double v = 0.0;
      if (external) v += external(dx * a) + external(dx * b);
      if (pair) {
        double d = dx * (double(a) - double(b));
        d -= spec_.length * std::round(d / spec_.length);
        v += pair(d);
      }
      h(a * n + b, a * n + b) += v;
    }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  evals_ = solver.eigenvalues();
  evecs_ = solver.eigenvectors();
  residual_ = eigen_residual_of(h, evals_, evecs_);
}

std::size_t TwoParticleOperatorSet::node(double q) const {
  const double t = q / step();
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9)
    throw std::invalid_argument("two-particle elements need grid-node positions");
  const long n = long(spec_.points);
  return std::size_t(((long(r) % n) + n) % n);
}

OracleValue TwoParticleOperatorSet::imaginary_time_element(double beta, double q1, double q2,
                                                           double p1, double p2) const {
  const std::size_t n = spec_.points;
  for (double p : {p1, p2}) {
    const double j = p * spec_.length / (2.0 * kPi * spec_.hbar);
    if (std::abs(j - std::round(j)) > 1e-9 || std::abs(std::round(j)) >= double(n / 2))
      throw std::invalid_argument("momentum " + std::to_string(p) + " is off the lattice");
  }
  ComplexVector pw(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      pw(a * n + b) = std::polar(1.0 / spec_.length,
                                 (p1 * step() * a + p2 * step() * b) / spec_.hbar);
  const std::size_t row = node(q1) * n + node(q2);
  const Eigen::VectorXd w = (-beta * evals_.array()).exp();
  const ComplexVector c = evecs_.transpose().cast<complex>() * pw;
  complex v = 0.0;
  for (Eigen::Index k = 0; k < evals_.size(); ++k) v += evecs_(row, k) * w(k) * c(k);
  OracleValue out;
  out.value = v;
  out.error = (double(n * n) * kEps + residual_) * w.maxCoeff() / spec_.length;
  return out;
}

SymmetrizedStateSum::SymmetrizedStateSum(std::vector<double> mode_energies,
                                         Statistics statistics)
    : modes_(std::move(mode_energies)), stats_(statistics) {
  if (modes_.empty()) throw std::invalid_argument("state sum needs at least one mode");
  for (double e : modes_)
    if (!std::isfinite(e)) throw std::invalid_argument("mode energies must be finite");
}

SymmetrizedStateSum SymmetrizedStateSum::ring(const RingSpec& spec, int max_mode,
                                              Statistics statistics) {
  if (max_mode < 0) throw std::invalid_argument("max_mode must be >= 0");
  std::vector<double> e;
  for (int j = -max_mode; j <= max_mode; ++j) {
    const double p = 2.0 * kPi * spec.hbar * j / spec.length;
    e.push_back(p * p / (2.0 * spec.mass));
  }
  return SymmetrizedStateSum(std::move(e), statistics);
}

double SymmetrizedStateSum::boltzmann_sum(int k, double beta) const {
  CompensatedSum<double> s;
  for (double e : modes_) s.add(std::exp(-double(k) * beta * e));
  return s.value();
}

std::vector<double> SymmetrizedStateSum::canonical(double beta, int n_max) const {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const double sign = exchange_sign(stats_);
  std::vector<double> b(n_max + 1, 0.0);
  for (int k = 1; k <= n_max; ++k) b[k] = boltzmann_sum(k, beta);
  std::vector<double> z(n_max + 1, 0.0);
  z[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += std::pow(sign, k + 1) * b[k] * z[n - k];
    z[n] = acc / n;
  }
  return z;
}

std::vector<std::vector<int>> permutation_cycle_types(int n) {
  if (n < 0 || n > 8) throw std::invalid_argument("permutation enumeration needs 0 <= N <= 8");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    std::vector<bool> seen(n, false);
    std::vector<int> cycles;
    for (int i = 0; i < n; ++i) {
      if (seen[i]) continue;
      int len = 0;
      for (int j = i; !seen[j]; j = perm[j]) {
        seen[j] = true;
        ++len;
      }
      cycles.push_back(len);
    }
    out.push_back(std::move(cycles));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<double> SymmetrizedStateSum::canonical_by_permutations(double beta,
                                                                   int n_max) const {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const double sign = exchange_sign(stats_);
  std::vector<double> b(n_max + 1, 0.0);
  for (int k = 1; k <= n_max; ++k) b[k] = boltzmann_sum(k, beta);
  std::vector<double> z(n_max + 1, 0.0);
  z[0] = 1.0;
  double factorial = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    factorial *= n;
    CompensatedSum<double> s;
    for (const auto& cycles : permutation_cycle_types(n)) {
      double term = std::pow(sign, n - int(cycles.size()));
      for (int len : cycles) term *= b[len];
      s.add(term);
    }
    z[n] = s.value() / factorial;
  }
  return z;
}

double SymmetrizedStateSum::grand_partition(double z, double beta, int n_max) const {
  if (n_max > 4) throw std::invalid_argument("grand partition is truncated at n_max <= 4");
  const auto zn = canonical(beta, n_max);
  double xi = 0.0, zp = 1.0;
  for (int n = 0; n <= n_max; ++n, zp *= z) xi += zp * zn[n];
  return xi;
}

}  // namespace phaselab
