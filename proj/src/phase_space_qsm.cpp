#include "phaselab/phase_space_qsm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCutoffLog = 27.631021115928547;  // -ln 1e-12
constexpr double kResidueLimit = 1e-10;
constexpr int kMaxParticles = 8;

double nearest_image(double d, double length) { return d - length * std::round(d / length); }

double poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Simpson weights of [0, L] folded onto the n periodic nodes.
std::vector<double> periodic_weights(std::size_t n, double h) {
  auto w = simpson_weights(n + 1, h);
  w[0] += w[n];
  w.pop_back();
  return w;
}

struct ClassAccumulator {
  std::vector<int> cycles;
  int count = 0;
};

// Cycle classes of S_n with their sizes.
std::vector<ClassAccumulator> cycle_classes(int n) {
  std::map<std::vector<int>, int> counts;
  for (auto c : permutation_cycle_types(n)) {
    std::sort(c.begin(), c.end(), std::greater<>());
    ++counts[c];
  }
  std::vector<ClassAccumulator> out;
  for (auto& [c, k] : counts) out.push_back({c, k});
  return out;
}

void check_n_max(int n_max) {
  if (n_max < 0 || n_max > kMaxParticles)
    throw std::invalid_argument("n_max must be in [0, 8]");
}

// Xi from cycle traces C_l = traces[l]; identity_only keeps only the
// identity permutation.
PartitionResult assemble_partition(const std::vector<complex>& traces, double z, Statistics sign,
                                   int n_max, bool identity_only) {
  const double s = exchange_sign(sign);
  PartitionResult out;
  complex total = 0.0;
  double zn = 1.0;
  for (int n = 0; n <= n_max; ++n, zn *= z) {
    complex xi_n = 0.0;
    if (n == 0) {
      xi_n = 1.0;
    } else if (identity_only) {
      xi_n = std::pow(traces[1], n) / factorial(n);
    } else {
      for (const auto& cls : cycle_classes(n)) {
        complex v = std::pow(s, double(n) - double(cls.cycles.size()));
        for (int l : cls.cycles) v *= traces[l];
        out.classes.push_back({n, cls.cycles, cls.count, v});
        xi_n += double(cls.count) * v;
      }
      xi_n /= factorial(n);
    }
    total += zn * xi_n;
    out.terms.push_back(zn * xi_n.real());
  }
  out.value = total.real();
  out.imaginary_residue = std::abs(total.imag()) / std::max(std::abs(total.real()), 1e-300);
  if (n_max > 0 && std::abs(out.terms.back()) > 0.01 * std::abs(out.value))
    out.warnings.push_back("truncation: the N = " + std::to_string(n_max) + " term is " +
                           std::to_string(100.0 * std::abs(out.terms.back() / out.value)) +
                           "% of the sum");
  if (out.imaginary_residue > kResidueLimit)
    throw ComplianceError("reality", "grand partition has relative imaginary part " +
                                         std::to_string(out.imaginary_residue));
  return out;
}

}  // namespace

void ModelSystem::validate() const {
  if (n_particles < 1 || n_particles > kMaxParticles)
    throw std::invalid_argument("n_particles must be in [1, 8]");
  if (!(box_length > 0.0) || !(mass > 0.0) || !(hbar > 0.0))
    throw std::invalid_argument("box length, mass and hbar must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(fugacity >= 0.0)) throw std::invalid_argument("fugacity must be >= 0");
  if (grid_points < 8 || grid_points % 2 != 0)
    throw std::invalid_argument("grid_points must be even and >= 8");
  if (pair_grid_points < 4 || pair_grid_points % 2 != 0)
    throw std::invalid_argument("pair_grid_points must be even and >= 4");
}

double ModelSystem::planck() const noexcept { return 2.0 * kPi * hbar; }

double ModelSystem::momentum_spacing() const noexcept { return planck() / box_length; }

double ModelSystem::thermal_wavelength() const noexcept {
  return planck() * std::sqrt(beta / (2.0 * kPi * mass));
}

double ModelSystem::hamiltonian(const PhasePoint& point) const {
  double e = 0.0;
  const std::size_t n = point.p.size();
  for (std::size_t j = 0; j < n; ++j) {
    e += point.p[j] * point.p[j] / (2.0 * mass);
    if (potential) e += potential(point.q[j]);
  }
  if (pair)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        e += pair(nearest_image(point.q[j] - point.q[k], box_length));
  return e;
}

PhaseObservable PhaseObservable::unit() { return {1.0, {}, {}, "1"}; }
PhaseObservable PhaseObservable::number() { return {0.0, {1.0}, {}, "N"}; }
PhaseObservable PhaseObservable::momentum_squared() { return {0.0, {0.0, 0.0, 1.0}, {}, "p^2"}; }
PhaseObservable PhaseObservable::position_squared() { return {0.0, {}, {0.0, 0.0, 1.0}, "q^2"}; }

double PhaseObservable::one_body(double p, double q) const {
  return poly(p_coeffs, p) + poly(q_coeffs, q);
}

double PhaseObservable::operator()(const PhasePoint& point) const {
  double a = constant;
  for (std::size_t j = 0; j < point.p.size(); ++j) a += one_body(point.p[j], point.q[j]);
  return a;
}

bool PhaseObservable::has_position_part() const noexcept {
  return std::any_of(q_coeffs.begin(), q_coeffs.end(), [](double c) { return c != 0.0; });
}

bool PhaseObservable::has_momentum_part() const noexcept {
  return std::any_of(p_coeffs.begin(), p_coeffs.end(), [](double c) { return c != 0.0; });
}

PhaseSpaceModel::PhaseSpaceModel(ModelSystem sys) : sys_(std::move(sys)) {
  sys_.validate();
  RingSpec spec{sys_.box_length, sys_.grid_points, sys_.mass, sys_.hbar};
  oracle_ = std::make_unique<GridOperatorSet>(spec, sys_.potential);
  if (2 * momentum_cutoff() >= int(sys_.grid_points) / 2)
    throw ComplianceError("momentum-band",
                          "thermal momenta need more than grid_points / 4 lattice modes");
}

const TwoParticleOperatorSet& PhaseSpaceModel::pair_oracle() const {
  std::call_once(pair_once_, [this] {
    RingSpec spec{sys_.box_length, sys_.pair_grid_points, sys_.mass, sys_.hbar};
    pair_oracle_ = std::make_unique<TwoParticleOperatorSet>(spec, sys_.potential, sys_.pair);
  });
  return *pair_oracle_;
}

int PhaseSpaceModel::momentum_cutoff() const {
  const double p_max = std::sqrt(2.0 * sys_.mass * kCutoffLog / sys_.beta);
  return int(std::ceil(p_max / sys_.momentum_spacing()));
}

void PhaseSpaceModel::require_lattice(const PhasePoint& point) const {
  if (point.p.size() != point.q.size() || point.p.empty())
    throw std::invalid_argument("phase point needs matching, non-empty p and q");
  if (point.p.size() > std::size_t(kMaxParticles))
    throw std::invalid_argument("at most 8 particles");
  const double dp = sys_.momentum_spacing();
  for (double p : point.p) {
    const double t = p / dp;
    if (std::abs(t - std::round(t)) > 1e-9 * std::max(1.0, std::abs(t)))
      throw std::invalid_argument("momentum " + std::to_string(p) + " is off the lattice");
  }
  for (double q : point.q)
    if (!(q >= 0.0 && q < sys_.box_length))
      throw std::invalid_argument("position " + std::to_string(q) + " is outside [0, L)");
}

SymmetrizationValue PhaseSpaceModel::eta(const PhasePoint& point, Statistics sign) const {
  require_lattice(point);
  const std::size_t n = point.p.size();
  const double s = exchange_sign(sign);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  complex acc = 0.0;
  do {
    // (P p - p).q = sum_j p_P(j) (q_j - q_P(j)), nearest image.
    double phase = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      phase += point.p[perm[j]] * nearest_image(point.q[j] - point.q[perm[j]], sys_.box_length);
    std::vector<bool> seen(n, false);
    int cycles = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j]) continue;
      ++cycles;
      for (std::size_t k = j; !seen[k]; k = perm[k]) seen[k] = true;
    }
    acc += std::pow(s, double(n) - cycles) * std::polar(1.0, -phase / sys_.hbar);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {acc, sign};
}

// <q| exp(-beta h) a |p> / <q|p> for one particle; a = 1 when obs is null.
// The one-body part of obs is used, without the constant.
complex PhaseSpaceModel::single_ratio(double q, double p, const PhaseObservable* obs,
                                      Route route) const {
  const double m = sys_.mass, hb = sys_.hbar, beta = sys_.beta;
  const double a = obs ? obs->one_body(p, q) : 1.0;
  const complex plane = std::polar(1.0 / std::sqrt(sys_.box_length), p * q / hb);
  if (route == Route::classical) {
    const double v = sys_.potential ? sys_.potential(q) : 0.0;
    return a * std::exp(-beta * (p * p / (2.0 * m) + v));
  }
  const GridOperatorSet& ops = *oracle_;
  const ComplexVector u = ops.propagated_plane_wave(beta, p);
  const complex base = ops.interpolate(u, q) / plane;
  if (!obs || route == Route::replaced) return a * base;
  const double fp = poly(obs->p_coeffs, p);
  complex num = fp * ops.interpolate(u, q);
  if (obs->has_position_part()) {
    ComplexVector gpw = ops.plane_wave(p);
    for (Eigen::Index k = 0; k < gpw.size(); ++k) gpw(k) *= poly(obs->q_coeffs, ops.x(k));
    const RealMatrix& v = ops.eigenvectors();
    const Eigen::VectorXd w = (-beta * ops.eigenvalues().array()).exp();
    const ComplexVector egpw =
        v.cast<complex>() * (w.cast<complex>().asDiagonal() * (v.transpose().cast<complex>() * gpw));
    num += ops.interpolate(egpw, q);
  }
  if (route == Route::symmetric) {
    // A exp(-beta h)|p>: f(p^) spectrally, g(q^) pointwise.
    std::vector<complex> us(u.data(), u.data() + u.size());
    auto fu = apply_momentum_symbol(us, ops.step(), hb,
                                    [&](double k) { return complex(poly(obs->p_coeffs, k)); });
    ComplexVector left(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k)
      left(k) = fu[k] + poly(obs->q_coeffs, ops.x(k)) * u(k);
    num = 0.5 * (num + ops.interpolate(left, q));
  }
  return num / plane;
}

CommutationValue PhaseSpaceModel::commutation_W(const PhasePoint& point) const {
  require_lattice(point);
  const std::size_t n = point.p.size();
  if (n > 2) throw std::invalid_argument("commutation_W is implemented for N <= 2");
  const double boltzmann = std::exp(-sys_.beta * sys_.hamiltonian(point));
  if (n == 2 && sys_.pair) {
    const auto el = pair_oracle().imaginary_time_element(sys_.beta, point.q[0], point.q[1],
                                                         point.p[0], point.p[1]);
    const complex plane = std::polar(1.0 / sys_.box_length,
                                     (point.p[0] * point.q[0] + point.p[1] * point.q[1]) / sys_.hbar);
    return {el.value / plane / boltzmann, true, {}};
  }
  complex r = 1.0;
  for (std::size_t j = 0; j < n; ++j) r *= single_ratio(point.q[j], point.p[j], nullptr, Route::plain);
  return {r / boltzmann, true, {}};
}

complex PhaseSpaceModel::weighted_ratio(const PhasePoint& point, const PhaseObservable& obs,
                                        Route route) const {
  require_lattice(point);
  if (sys_.pair) throw std::invalid_argument("observable ratios need a one-body Hamiltonian");
  const std::size_t n = point.p.size();
  std::vector<complex> g(n), ga(n);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = single_ratio(point.q[j], point.p[j], nullptr, route);
    ga[j] = single_ratio(point.q[j], point.p[j], &obs, route);
  }
  complex all = 1.0;
  for (auto v : g) all *= v;
  complex acc = obs.constant * all;
  for (std::size_t j = 0; j < n; ++j) {
    complex term = ga[j];
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) term *= g[k];
    acc += term;
  }
  return acc;
}

CommutationValue PhaseSpaceModel::commutation_W_A(const PhasePoint& point,
                                                  const PhaseObservable& obs) const {
  const double a = obs(point);
  if (a == 0.0) return {complex(0.0), false, obs.tag};
  const double boltzmann = std::exp(-sys_.beta * sys_.hamiltonian(point));
  return {weighted_ratio(point, obs, Route::plain) / (boltzmann * a), true, obs.tag};
}

complex PhaseSpaceModel::integrand(const PhasePoint& point, Statistics sign,
                                   const PhaseObservable& obs, Route route) const {
  const complex r = weighted_ratio(point, obs, route);
  if (route == Route::classical) return r;
  const complex v = r * eta(point, sign).value;
  return route == Route::symmetric ? complex(v.real()) : v;
}

double PhaseSpaceModel::symmetric_integrand(const PhasePoint& point, Statistics sign,
                                            const PhaseObservable& obs) const {
  return integrand(point, sign, obs, Route::symmetric).real();
}

// M_{p'p} = (1/L) int dq F(p, q) exp(-i (p' - p) q / hbar) over the lattice
// |j| <= cutoff, where F is exp(-beta H) W (obs null) or the one-body
// observable-weighted ratio on `route`.
ComplexMatrix PhaseSpaceModel::cycle_matrix(const PhaseObservable* obs, Route route) const {
  const GridOperatorSet& ops = *oracle_;
  const std::size_t n = ops.size();
  const int cut = momentum_cutoff();
  const int dim = 2 * cut + 1;
  const double L = sys_.box_length, hb = sys_.hbar, beta = sys_.beta;
  const auto w = periodic_weights(n, ops.step());
  const RealMatrix& v = ops.eigenvectors();
  const Eigen::VectorXd decay = (-beta * ops.eigenvalues().array()).exp();
  auto propagate = [&](const ComplexVector& x) -> ComplexVector {
    return v.cast<complex>() * (decay.cast<complex>().asDiagonal() * (v.transpose().cast<complex>() * x));
  };
  std::vector<double> vx(n, 0.0), gx(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (sys_.potential) vx[a] = sys_.potential(ops.x(a));
    if (obs) gx[a] = poly(obs->q_coeffs, ops.x(a));
  }

  // F(p_j, x_a) for every lattice column.
  Eigen::MatrixXcd f(n, dim);
  for (int c = 0; c < dim; ++c) {
    const double p = ops.lattice_momentum(c - cut);
    const double kin = p * p / (2.0 * sys_.mass);
    const double fp = obs ? poly(obs->p_coeffs, p) : 1.0;
    if (route == Route::classical) {
      for (std::size_t a = 0; a < n; ++a)
        f(a, c) = (obs ? fp + gx[a] : 1.0) * std::exp(-beta * (kin + vx[a]));
      continue;
    }
    const ComplexVector pw = ops.plane_wave(p);
    ComplexVector u;
    if (ops.free())
      u = std::exp(-beta * kin) * pw;
    else
      u = propagate(pw);
    ComplexVector num;
    if (!obs) {
      num = u;
    } else if (route == Route::replaced) {
      num = u;
      for (std::size_t a = 0; a < n; ++a) num(a) *= fp + gx[a];
    } else {
      num = fp * u;
      if (obs->has_position_part()) {
        ComplexVector gpw = pw;
        for (std::size_t a = 0; a < n; ++a) gpw(a) *= gx[a];
        num += propagate(gpw);
      }
      if (route == Route::symmetric) {
        std::vector<complex> us(u.data(), u.data() + u.size());
        auto fu = apply_momentum_symbol(us, ops.step(), hb,
                                        [&](double k) { return complex(poly(obs->p_coeffs, k)); });
        for (std::size_t a = 0; a < n; ++a) num(a) = 0.5 * (num(a) + fu[a] + gx[a] * u(a));
      }
    }
    for (std::size_t a = 0; a < n; ++a) f(a, c) = num(a) / pw(a);
  }

  ComplexMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const double dp = ops.lattice_momentum(r - cut) - ops.lattice_momentum(c - cut);
      complex acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) acc += w[a] * f(a, c) * std::polar(1.0, -dp * ops.x(a) / hb);
      m(r, c) = acc / L;
    }
  return m;
}

PartitionResult PhaseSpaceModel::grand_partition(Statistics sign, int n_max, Route route) const {
  check_n_max(n_max);
  if (sys_.pair) throw std::invalid_argument("the partition integrals need a one-body Hamiltonian");
  const ComplexMatrix m = cycle_matrix(nullptr, route);
  std::vector<complex> traces(std::max(n_max, 1) + 1, 0.0);
  ComplexMatrix power = ComplexMatrix::Identity(m.rows(), m.cols());
  for (int l = 1; l <= std::max(n_max, 1); ++l) {
    power = power * m;
    traces[l] = power.trace();
  }
  return assemble_partition(traces, sys_.fugacity, sign, n_max, route == Route::classical);
}

PartitionResult PhaseSpaceModel::grand_partition_continuum(Statistics sign, int n_max) const {
  check_n_max(n_max);
  if (sys_.potential || sys_.pair)
    throw std::invalid_argument("the continuum route is implemented for the ideal gas only");
  const std::size_t n = sys_.grid_points;
  const double L = sys_.box_length, hb = sys_.hbar, h = L / double(n);
  // g(s) = (1/h) int dp exp(-beta p^2 / 2m) exp(-i p s / hbar), Simpson in p.
  const double p_max = std::sqrt(2.0 * sys_.mass * kCutoffLog / sys_.beta);
  const std::size_t np = 4001;
  const double dp = 2.0 * p_max / double(np - 1);
  const auto wp = simpson_weights(np, dp);
  std::vector<double> g(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double s = nearest_image(h * double(a), L);
    double acc = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
      const double p = -p_max + dp * double(k);
      acc += wp[k] * std::exp(-sys_.beta * p * p / (2.0 * sys_.mass)) * std::cos(p * s / hb);
    }
    g[a] = acc / sys_.planck();
  }
  // A cycle of length l is a closed chain of l kernels around the ring:
  // C_l = L (g * g * ... * g)(0), circular convolution in q.
  const auto w = periodic_weights(n, h);
  std::vector<complex> traces(std::max(n_max, 1) + 1, 0.0);
  std::vector<double> chain = g;
  traces[1] = L * chain[0];
  for (int l = 2; l <= n_max; ++l) {
    std::vector<double> next(n, 0.0);
    for (std::size_t b = 0; b < n; ++b) {
      double acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) acc += w[a] * g[a] * chain[(b + n - a) % n];
      next[b] = acc;
    }
    chain.swap(next);
    traces[l] = L * chain[0];
  }
  return assemble_partition(traces, sys_.fugacity, sign, n_max, false);
}

AverageResult PhaseSpaceModel::statistical_average(Statistics sign, const PhaseObservable& obs,
                                                   int n_max, Route route) const {
  check_n_max(n_max);
  if (sys_.pair) throw std::invalid_argument("the average integrals need a one-body Hamiltonian");
  const ComplexMatrix m = cycle_matrix(nullptr, route);
  const ComplexMatrix ma = cycle_matrix(&obs, route);
  const int lmax = std::max(n_max, 1);
  std::vector<complex> c(lmax + 1, 0.0), d(lmax + 1, 0.0);
  ComplexMatrix power = ComplexMatrix::Identity(m.rows(), m.cols());  // M^(l-1)
  for (int l = 1; l <= lmax; ++l) {
    d[l] = double(l) * (power * ma).trace();
    power = power * m;
    c[l] = power.trace();
  }
  if (route == Route::symmetric) {
    // The symmetric integrand keeps only the real part pointwise.
    for (auto& v : d) v = v.real();
  }
  const double s = exchange_sign(sign);
  const double z = sys_.fugacity;
  const bool identity_only = route == Route::classical;
  complex xi = 0.0, num = 0.0;
  double zn = 1.0, last_term = 0.0;
  for (int n = 0; n <= n_max; ++n, zn *= z) {
    complex xi_n = 0.0, num_n = 0.0;
    if (n == 0) {
      xi_n = 1.0;
    } else if (identity_only) {
      xi_n = std::pow(c[1], n);
      num_n = double(n) * d[1] * std::pow(c[1], n - 1);
    } else {
      for (const auto& cls : cycle_classes(n)) {
        const double sg = std::pow(s, double(n) - double(cls.cycles.size()));
        complex prod = sg;
        for (int l : cls.cycles) prod *= c[l];
        complex der = 0.0;
        for (std::size_t k = 0; k < cls.cycles.size(); ++k) {
          complex t = sg * d[cls.cycles[k]];
          for (std::size_t o = 0; o < cls.cycles.size(); ++o)
            if (o != k) t *= c[cls.cycles[o]];
          der += t;
        }
        xi_n += double(cls.count) * prod;
        num_n += double(cls.count) * der;
      }
    }
    xi += zn * xi_n / factorial(n);
    last_term = (zn * xi_n / factorial(n)).real();
    num += zn * (num_n + obs.constant * xi_n) / factorial(n);
  }
  AverageResult out;
  const complex avg = num / xi;
  out.value = avg.real();
  out.partition = xi.real();
  out.imaginary_residue = std::abs(avg.imag()) / std::max(std::abs(avg.real()), 1e-300);
  if (out.imaginary_residue > kResidueLimit)
    throw ComplianceError("reality", "average has relative imaginary part " +
                                         std::to_string(out.imaginary_residue));
  if (n_max > 0 && std::abs(last_term) > 0.01 * std::abs(out.partition))
    out.warnings.push_back("truncation: the N = " + std::to_string(n_max) +
                           " term exceeds 1% of the partition sum");
  return out;
}

double number_from_partition(const ModelSystem& sys, Statistics sign, int n_max,
                             double relative_step) {
  if (!(sys.fugacity > 0.0)) throw std::invalid_argument("fugacity must be positive");
  ModelSystem lo = sys, hi = sys;
  const double dz = relative_step * sys.fugacity;
  lo.fugacity -= dz;
  hi.fugacity += dz;
  const double xlo = PhaseSpaceModel(lo).grand_partition(sign, n_max).value;
  const double xhi = PhaseSpaceModel(hi).grand_partition(sign, n_max).value;
  return sys.fugacity * (std::log(xhi) - std::log(xlo)) / (2.0 * dz);
}

}  // namespace phaselab
