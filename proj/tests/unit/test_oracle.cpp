#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "phaselab/oracle.hpp"
#include "phaselab/wavepackets.hpp"

using namespace phaselab;

namespace {

const double kPi = std::numbers::pi;

// Distinct occupation patterns of n particles over the modes, by recursion
// over non-decreasing mode index tuples.
double occupancy_sum(const std::vector<double>& e, double beta, int n, bool fermion,
                     std::size_t first = 0, double energy = 0.0) {
  if (n == 0) return std::exp(-beta * energy);
  double s = 0.0;
  for (std::size_t k = first; k < e.size(); ++k)
    s += occupancy_sum(e, beta, n - 1, fermion, fermion ? k + 1 : k, energy + e[k]);
  return s;
}

}  // namespace

TEST_CASE("imaginary-time element, free particle") {
  const RingSpec spec{10.0, 64, 1.0, 1.0};
  const GridOperatorSet ops(spec);
  CHECK(ops.free());
  CHECK(ops.eigen_residual() <= 1e-10);
  for (int j : {-5, 0, 3, 17}) {
    const double p = ops.lattice_momentum(j);
    for (double q : {0.0, 2.5, 7.34}) {
      const complex pw = std::polar(1.0 / std::sqrt(spec.length), p * q);
      CHECK(std::abs(ops.imaginary_time_element(0.0, q, p).value - pw) < 1e-12);
      const complex want = std::exp(-0.7 * p * p / 2.0) * pw;
      const auto got = ops.imaginary_time_element(0.7, q, p);
      CHECK(std::abs(got.value - want) < 1e-12);
      CHECK(got.error < 1e-10);
    }
  }
}

TEST_CASE("momentum must be on the lattice") {
  const GridOperatorSet ops({10.0, 32, 1.0, 1.0});
  CHECK_THROWS_AS(ops.imaginary_time_element(1.0, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(ops.imaginary_time_element(1.0, 0.0, ops.lattice_momentum(15) * 17 / 15.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(GridOperatorSet({10.0, 31, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("harmonic well on a wide ring") {
  const double L = 20.0;
  const RingSpec spec{L, 128, 1.0, 1.0};
  const GridOperatorSet ops(spec, harmonic_potential(1.0, 1.0, L / 2));
  CHECK(ops.eigen_residual() <= 1e-10);
  // Oscillator length 1 is far below L / 2, so the low levels are hbar w (n + 1/2).
  for (int n = 0; n < 5; ++n) CHECK(ops.eigenvalues()(n) == doctest::Approx(n + 0.5).epsilon(1e-9));

  SUBCASE("eigenbasis propagator equals the Pade matrix exponential") {
    const GridOperatorSet small({8.0, 64, 1.0, 1.0}, harmonic_potential(1.0, 1.3, 4.0));
    for (double beta : {0.05, 0.5, 2.0}) {
      const RealMatrix a = small.propagator(beta);
      const RealMatrix b = expm(-beta * small.hamiltonian());
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * b.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("large beta is dominated by the ground state") {
    const double beta = 12.0;
    const double p = ops.lattice_momentum(2);
    const ComplexVector pw = ops.plane_wave(p);
    const auto v0 = ops.eigenvectors().col(0);
    const complex overlap = v0.cast<complex>().dot(pw);
    for (std::size_t a : {50u, 64u, 70u}) {
      const complex ground = std::exp(-beta * ops.eigenvalues()(0)) * v0(a) * overlap;
      const complex got = ops.imaginary_time_element(beta, ops.x(a), p).value;
      CHECK(std::abs(got - ground) <= 1e-4 * std::abs(ground));
    }
  }
  SUBCASE("element from the direct matrix exponential") {
    const GridOperatorSet small({8.0, 64, 1.0, 1.0}, harmonic_potential(1.0, 1.3, 4.0));
    const RealMatrix prop = expm(-0.3 * small.hamiltonian());
    const double p = small.lattice_momentum(-4);
    const ComplexVector u = prop.cast<complex>() * small.plane_wave(p);
    for (std::size_t a = 0; a < 64; a += 9)
      CHECK(std::abs(small.imaginary_time_element(0.3, small.x(a), p).value - u(a)) < 1e-12);
  }
}

TEST_CASE("trigonometric interpolation is exact for lattice plane waves") {
  const GridOperatorSet ops({6.0, 32, 1.0, 1.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int j : {-15, -3, 0, 7, 15}) {
    const double p = ops.lattice_momentum(j);
    const ComplexVector pw = ops.plane_wave(p);
    for (int i = 0; i < 5; ++i) {
      const double q = u(rng);
      CHECK(std::abs(ops.interpolate(pw, q) - std::polar(1.0 / std::sqrt(6.0), p * q)) < 1e-12);
    }
  }
}

TEST_CASE("momentum matrix squares to twice the kinetic energy inside the band") {
  const GridOperatorSet ops({5.0, 32, 2.0, 1.0});
  require_hermitian(ops.momentum());
  const ComplexVector pw = ops.plane_wave(ops.lattice_momentum(6));
  const double p = ops.lattice_momentum(6);
  CHECK((ops.momentum() * pw - p * pw).norm() < 1e-12);
  const ComplexVector t = ops.hamiltonian().cast<complex>() * pw;
  CHECK((t - p * p / 4.0 * pw).norm() < 1e-11);
}

TEST_CASE("dense_expectation") {
  const double L = 20.0;
  const GridOperatorSet ops({L, 128, 1.0, 1.0}, harmonic_potential(1.0, 1.0, L / 2));
  const auto n = Eigen::Index(ops.size());
  SUBCASE("identity gives the squared norm") {
    ComplexVector psi(n);
    for (Eigen::Index a = 0; a < n; ++a) psi(a) = complex(std::sin(0.1 * a), 0.3);
    const double want = ops.step() * psi.squaredNorm();
    CHECK(dense_expectation(ops, psi, ComplexMatrix::Identity(n, n)) == doctest::Approx(want));
  }
  SUBCASE("hamiltonian on an eigenvector") {
    for (int k : {0, 3, 10}) {
      const ComplexVector v = ops.eigenvectors().col(k).cast<complex>() / std::sqrt(ops.step());
      const double e = dense_expectation(ops, v, ops.hamiltonian().cast<complex>());
      CHECK(std::abs(e - ops.eigenvalues()(k)) < 1e-10);
    }
  }
  SUBCASE("packet position agrees with quadrature moments") {
    const auto packet = WavePacket::one_dimensional(0.8, 0.0, 9.3);
    ComplexVector v(n);
    for (Eigen::Index a = 0; a < n; ++a) v(a) = packet.factor(0, ops.x(a));
    const double mean = dense_expectation(ops, v, ops.position());
    CHECK(std::abs(mean - moments(packet).mean_position[0]) < 1e-10);
  }
  SUBCASE("non-hermitian input is rejected") {
    ComplexMatrix m = ComplexMatrix::Identity(n, n);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(dense_expectation(ops, ComplexVector::Ones(n), m), ComplianceError);
  }
}

TEST_CASE("two particles without a pair potential factorise") {
  const RingSpec spec{6.0, 12, 1.0, 1.0};
  const auto well = harmonic_potential(1.0, 0.8, 3.0);
  const TwoParticleOperatorSet two(spec, well, {});
  const GridOperatorSet one(spec, well);
  CHECK(two.eigen_residual() <= 1e-10);
  const double beta = 0.4;
  const double p1 = one.lattice_momentum(2), p2 = one.lattice_momentum(-1);
  for (std::size_t a : {0u, 5u}) {
    for (std::size_t b : {3u, 11u}) {
      const complex want = one.imaginary_time_element(beta, one.x(a), p1).value *
                           one.imaginary_time_element(beta, one.x(b), p2).value;
      CHECK(std::abs(two.imaginary_time_element(beta, one.x(a), one.x(b), p1, p2).value - want) <
            1e-12);
    }
  }
  CHECK_THROWS_AS(two.imaginary_time_element(beta, 0.1, 0.0, p1, p2), std::invalid_argument);
}

TEST_CASE("symmetrized state sum") {
  SUBCASE("n_max = 0") {
    const SymmetrizedStateSum s({0.0, 1.0}, Statistics::boson);
    CHECK(s.grand_partition(0.7, 1.0, 0) == 1.0);
  }
  SUBCASE("two particles against the double sum over mode pairs") {
    const std::vector<double> e{0.0, 0.3, 0.3, 1.1, 2.0};
    const double beta = 0.9;
    double bose = 0.0, fermi = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i; j < e.size(); ++j) {
        const double w = std::exp(-beta * (e[i] + e[j]));
        bose += w;
        if (i != j) fermi += w;
      }
    const SymmetrizedStateSum sb(e, Statistics::boson), sf(e, Statistics::fermion);
    const double b1 = sb.boltzmann_sum(1, beta), b2 = sb.boltzmann_sum(2, beta);
    CHECK(sb.canonical(beta, 2)[2] == doctest::Approx((b1 * b1 + b2) / 2).epsilon(1e-14));
    CHECK(sf.canonical(beta, 2)[2] == doctest::Approx((b1 * b1 - b2) / 2).epsilon(1e-14));
    CHECK(sb.canonical(beta, 2)[2] == doctest::Approx(bose).epsilon(1e-14));
    CHECK(sf.canonical(beta, 2)[2] == doctest::Approx(fermi).epsilon(1e-14));
  }
  SUBCASE("single mode excludes a second fermion") {
    const SymmetrizedStateSum s({0.4}, Statistics::fermion);
    CHECK(s.canonical(1.0, 2)[2] == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("recursion, permutations and occupancy enumeration agree") {
    const auto ring = SymmetrizedStateSum::ring({3.0, 64, 1.0, 1.0}, 6, Statistics::boson);
    for (auto st : {Statistics::boson, Statistics::fermion}) {
      const SymmetrizedStateSum s(ring.mode_energies(), st);
      const auto rec = s.canonical(0.8, 4);
      const auto perm = s.canonical_by_permutations(0.8, 4);
      for (int n = 0; n <= 4; ++n) {
        const double occ = occupancy_sum(s.mode_energies(), 0.8, n, st == Statistics::fermion);
        CHECK(rec[n] == doctest::Approx(occ).epsilon(1e-13));
        CHECK(perm[n] == doctest::Approx(occ).epsilon(1e-13));
      }
    }
  }
  SUBCASE("truncation limit") {
    const SymmetrizedStateSum s({0.0}, Statistics::boson);
    CHECK_THROWS_AS(s.grand_partition(1.0, 1.0, 5), std::invalid_argument);
  }
}

TEST_CASE("permutation cycle types") {
  const auto t3 = permutation_cycle_types(3);
  REQUIRE(t3.size() == 6);
  std::map<std::size_t, int> by_cycles;
  for (const auto& c : t3) ++by_cycles[c.size()];
  CHECK(by_cycles[3] == 1);  // identity
  CHECK(by_cycles[2] == 3);  // transpositions
  CHECK(by_cycles[1] == 2);  // three-cycles
  CHECK(permutation_cycle_types(8).size() == 40320);
  CHECK_THROWS_AS(permutation_cycle_types(9), std::invalid_argument);
}
