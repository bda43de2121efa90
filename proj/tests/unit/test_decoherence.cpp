#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "phaselab/decoherence.hpp"

using namespace phaselab;

namespace {

const double kLn2 = std::log(2.0);

// Two levels {0, eps} with T = eps / ln 2 and M0 = 8: reservoir {8, 4}.
SubsystemSpectrum two_level(int degeneracy) {
  return SubsystemSpectrum({{0.0, degeneracy}, {1.0, degeneracy}});
}
const ReservoirModel kTwoLevelReservoir{1.0 / kLn2, 8.0};

// Builds the full system (x) reservoir vector and A (x) 1 explicitly.
complex dense_tensor_expectation(const SubsystemSpectrum& spec, const TotalState& state,
                                 const SubsystemOperator& op) {
  const auto ns = Eigen::Index(spec.microstates());
  Eigen::Index nr = 0;
  for (const auto& b : state.blocks) nr += b.cols();
  ComplexVector psi = ComplexVector::Zero(ns * nr);
  ComplexMatrix a = ComplexMatrix::Zero(ns, ns);
  Eigen::Index g0 = 0, h0 = 0;
  for (std::size_t al = 0; al < state.blocks.size(); ++al) {
    const auto& c = state.blocks[al];
    for (Eigen::Index g = 0; g < c.rows(); ++g)
      for (Eigen::Index h = 0; h < c.cols(); ++h) psi((g0 + g) * nr + (h0 + h)) = c(g, h);
    a.block(g0, g0, c.rows(), c.rows()) = op.blocks[al];
    g0 += c.rows();
    h0 += c.cols();
  }
  ComplexMatrix full = ComplexMatrix::Zero(ns * nr, ns * nr);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < ns; ++j)
      for (Eigen::Index h = 0; h < nr; ++h) full(i * nr + h, j * nr + h) = a(i, j);
  return psi.dot(full * psi) / psi.squaredNorm();
}

ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = complex(n01(rng), n01(rng));
  return (m + m.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("reservoir degeneracies") {
  const auto spec = two_level(1);
  const auto nr = kTwoLevelReservoir.degeneracies(spec);
  CHECK(nr == std::vector<std::int64_t>{8, 4});
  CHECK(kTwoLevelReservoir.max_rounding_error(spec) < 1e-14);
  CHECK_THROWS_AS(ReservoirModel({1.0, 1.0}).degeneracies(SubsystemSpectrum({{5.0, 1}})),
                  std::invalid_argument);
  const ReservoirModel rough{1.0, 10.0};
  CHECK(rough.max_rounding_error(SubsystemSpectrum({{0.0, 1}, {0.7, 1}})) ==
        doctest::Approx(std::abs(5.0 / (10 * std::exp(-0.7)) - 1.0)));
  CHECK(spec.entropy(0) == 0.0);
  CHECK(SubsystemSpectrum({{0.0, 4}}).entropy(0) == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(SubsystemSpectrum({{0.0, 0}}), std::invalid_argument);
}

TEST_CASE("sample_total_state") {
  SUBCASE("single coefficient") {
    const auto s = sample_total_state(SubsystemSpectrum({{0.0, 1}}), {1.0, 1.0}, 3);
    REQUIRE(s.dimension() == 1);
    CHECK(std::abs(s.blocks[0](0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("unit magnitudes and determinism") {
    const auto spec = two_level(3);
    const auto a = sample_total_state(spec, kTwoLevelReservoir, 42);
    const auto b = sample_total_state(spec, kTwoLevelReservoir, 42);
    const auto c = sample_total_state(spec, kTwoLevelReservoir, 43);
    CHECK(a.dimension() == 3 * 8 + 3 * 4);
    for (std::size_t k = 0; k < a.blocks.size(); ++k) {
      CHECK((a.blocks[k].cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
      CHECK(a.blocks[k] == b.blocks[k]);
      CHECK(a.blocks[k] != c.blocks[k]);
    }
  }
  SUBCASE("dimension cap") {
    CHECK_THROWS_AS(sample_total_state(two_level(2), kTwoLevelReservoir, 1, 20), std::length_error);
  }
}

TEST_CASE("subsystem_expectation") {
  SUBCASE("identity") {
    const auto spec = two_level(3);
    const auto s = sample_total_state(spec, kTwoLevelReservoir, 9);
    CHECK(std::abs(subsystem_expectation(s, SubsystemOperator::identity(spec)) - 1.0) < 1e-15);
  }
  SUBCASE("one microstate per macrostate") {
    const auto spec = two_level(1);
    const auto s = sample_total_state(spec, kTwoLevelReservoir, 11);
    const auto v = subsystem_expectation(s, SubsystemOperator::energy(spec));
    CHECK(v.real() == doctest::Approx(4.0 / 12.0).epsilon(1e-14));
    CHECK(std::abs(v.imag()) < 1e-15);
  }
  SUBCASE("dense tensor-product oracle") {
    std::mt19937_64 rng(5);
    const auto spec = two_level(2);
    SubsystemOperator op{{random_hermitian(2, rng), random_hermitian(2, rng)}};
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto s = sample_total_state(spec, kTwoLevelReservoir, seed);
      CHECK(std::abs(subsystem_expectation(s, op) - dense_tensor_expectation(spec, s, op)) < 1e-13);
      const auto u = sample_uniform_state(spec, kTwoLevelReservoir, seed);
      CHECK(std::abs(subsystem_expectation(u, op) - dense_tensor_expectation(spec, u, op)) < 1e-13);
    }
  }
  SUBCASE("shape mismatch") {
    const auto s = sample_total_state(two_level(2), kTwoLevelReservoir, 1);
    CHECK_THROWS_AS(subsystem_expectation(s, SubsystemOperator::identity(two_level(3))),
                    std::invalid_argument);
  }
}

TEST_CASE("reduced density matrix") {
  const auto spec = SubsystemSpectrum({{0.0, 3}, {0.5, 2}, {2.0, 4}});
  const ReservoirModel res{1.0, 20.0};
  const auto rho = reduced_density_matrix(sample_total_state(spec, res, 77));
  REQUIRE(rho.size() == 3);
  complex tr = 0.0;
  for (const auto& r : rho) {
    tr += r.trace();
    CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(std::abs(tr - 1.0) < 1e-12);

  SUBCASE("one reservoir state per macrostate gives rank-one blocks") {
    const auto pure = reduced_density_matrix(
        sample_total_state(SubsystemSpectrum({{0.0, 3}, {0.0, 2}}), {1.0, 1.0}, 5));
    for (const auto& r : pure) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r);
      CHECK(es.eigenvalues().head(r.rows() - 1).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("random-phase average converges to the Gibbs trace") {
  const auto spec = two_level(2);
  // E_alpha on the diagonal plus a coupling inside each degenerate block.
  const auto op = SubsystemOperator::tridiagonal(spec, {0.0, 1.0}, complex(0.3, 0.4));
  CHECK(gibbs_average(spec, kTwoLevelReservoir.temperature, op) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(reservoir_limit(spec, kTwoLevelReservoir, op) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const std::vector<std::uint64_t> marks{100, 1000, 10000, 100000};
  const auto r = random_phase_average(spec, kTwoLevelReservoir, op, 100000, 2024, marks);
  REQUIRE(r.trace.size() == 4);
  CHECK(std::abs(r.trace[2].mean - 1.0 / 3.0) <= 3.0 * r.trace[2].std_error);
  CHECK(std::abs(r.estimate.mean - 1.0 / 3.0) <= 3.0 * r.estimate.std_error);

  std::vector<double> m, se, off;
  for (const auto& p : r.trace) {
    m.push_back(double(p.samples));
    se.push_back(p.std_error);
    off.push_back(p.off_diag_norm);
  }
  CHECK(loglog_slope(m, se) == doctest::Approx(-0.5).epsilon(0.2));
  CHECK(loglog_slope(m, off) == doctest::Approx(-0.5).epsilon(0.2));

  SUBCASE("off-diagonal-only operator averages to zero") {
    const auto coupling = SubsystemOperator::tridiagonal(spec, {0.0, 0.0}, complex(1.0, -0.5));
    const auto z = random_phase_average(spec, kTwoLevelReservoir, coupling, 10000, 7);
    CHECK(std::abs(z.estimate.mean) <= 3.0 * z.estimate.std_error);
    CHECK(z.estimate.std_error > 0.0);
  }
  SUBCASE("same seed, same numbers") {
    const auto a = random_phase_average(spec, kTwoLevelReservoir, op, 500, 1);
    const auto b = random_phase_average(spec, kTwoLevelReservoir, op, 500, 1);
    CHECK(a.estimate.mean == b.estimate.mean);
    CHECK(a.estimate.std_error == b.estimate.std_error);
  }
  CHECK_THROWS_AS(random_phase_average(spec, kTwoLevelReservoir, op, 1, 1), std::invalid_argument);
}

TEST_CASE("wavespace-uniform average") {
  const auto spec = two_level(2);
  SUBCASE("identity is exactly one per sample") {
    const auto r = wavespace_uniform_average(spec, kTwoLevelReservoir,
                                             SubsystemOperator::identity(spec), 100, 3);
    CHECK(std::abs(r.estimate.mean - 1.0) < 1e-14);
    CHECK(r.estimate.std_error < 1e-14);
  }
  SUBCASE("odd terms cancel") {
    const auto coupling = SubsystemOperator::tridiagonal(spec, {0.0, 0.0}, complex(0.2, 1.0));
    const auto r = wavespace_uniform_average(spec, kTwoLevelReservoir, coupling, 10000, 8);
    CHECK(std::abs(r.estimate.mean) <= 3.0 * r.estimate.std_error);
  }
  SUBCASE("agrees with the random-phase route") {
    std::mt19937_64 rng(12);
    const std::vector<std::pair<SubsystemSpectrum, ReservoirModel>> configs{
        {two_level(2), kTwoLevelReservoir},
        {SubsystemSpectrum({{0.0, 3}, {0.4, 2}, {1.5, 1}}), {0.8, 64.0}},
        {SubsystemSpectrum({{-0.5, 2}, {0.5, 2}}), {2.0, 30.0}}};
    for (const auto& [sp, res] : configs) {
      SubsystemOperator op;
      for (const auto& l : sp.levels()) op.blocks.push_back(random_hermitian(l.degeneracy, rng));
      const auto a = random_phase_average(sp, res, op, 20000, 31);
      const auto b = wavespace_uniform_average(sp, res, op, 20000, 31);
      const double sigma = std::hypot(a.estimate.std_error, b.estimate.std_error);
      CHECK(std::abs(a.estimate.mean - b.estimate.mean) <= 3.0 * sigma);
      CHECK(std::abs(b.estimate.mean - reservoir_limit(sp, res, op)) <= 3.0 * b.estimate.std_error);
    }
  }
}

TEST_CASE("trace csv") {
  std::ostringstream os;
  write_trace_csv(os, {{100, 0.25, 0.01, 0.5}});
  CHECK(os.str() == "samples,mean,stderr,off_diag_norm\n100,0.25,0.01,0.5\n");
}
