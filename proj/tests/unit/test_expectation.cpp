#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "phaselab/expectation.hpp"

using namespace phaselab;

namespace {

struct RandomState {
  std::vector<WavePacket> packets;
  std::vector<complex> amplitudes;
};

RandomState random_state(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uq(0.0, 60.0), up(-8.0, 8.0);
  std::normal_distribution<double> n01;
  RandomState s;
  double norm = 0.0;
  for (int i = 0; i < count; ++i) {
    s.packets.push_back(WavePacket::one_dimensional(1.0, up(rng), uq(rng)));
    s.amplitudes.emplace_back(n01(rng), n01(rng));
    norm += std::norm(s.amplitudes.back());
  }
  for (auto& a : s.amplitudes) a /= std::sqrt(norm);
  return s;
}

// Dense matrix of f(p^) + g(q^) built independently of Observable::matrix.
ComplexMatrix dense_polynomial(const PositionGrid& g, std::vector<double> pc,
                               std::vector<double> qc) {
  const auto n = g.size();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 1; k < pc.size(); ++k)
    if (pc[k] != 0.0) m += pc[k] * momentum_power_matrix(n, g.step(), 1.0, int(k));
  if (!pc.empty()) m += pc[0] * ComplexMatrix::Identity(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    double v = 0.0, x = 1.0;
    for (double c : qc) {
      v += c * x;
      x *= g.x(a);
    }
    m(a, a) += v;
  }
  return m;
}

}  // namespace

TEST_CASE("matrix_element") {
  const auto a = WavePacket::one_dimensional(1.0, 2.0, 0.0);
  const auto b = WavePacket::one_dimensional(1.0, 1.0, 1.5);
  const WavePacket both[] = {a, b};
  const auto grid = grid_for(both);
  SUBCASE("identity gives the overlap") {
    const complex m = matrix_element(a, b, Observable::identity(), grid);
    CHECK(std::abs(m - overlap_analytic(a, b).value()) < 1e-10);
  }
  SUBCASE("position on the diagonal") {
    CHECK(std::abs(matrix_element(b, b, Observable::position(), grid) - 1.5) < 1e-10);
  }
  SUBCASE("p^2 gives mean squared plus variance") {
    const auto obs = Observable::polynomial({0, 0, 1}, {});
    const complex m = matrix_element(a, a, obs, grid);
    CHECK(std::abs(m - 4.25) < 1e-10);
    // Same number from the dense grid operator.
    const auto s = a.sample_factor(0, grid);
    const double dense = dense_expectation(grid, s, dense_polynomial(grid, {0, 0, 1}, {}));
    CHECK(std::abs(dense - 4.25) < 1e-10);
  }
  SUBCASE("grid operator kind") {
    const auto obs = Observable::grid_operator(dense_polynomial(grid, {0, 0, 1}, {0, 0, 1}), grid,
                                               "p^2 + q^2");
    const auto poly = Observable::polynomial({0, 0, 1}, {0, 0, 1});
    CHECK(std::abs(matrix_element(a, b, obs, grid) - matrix_element(a, b, poly, grid)) < 1e-10);
    const auto other = PositionGrid::covering(-12.0, 12.0, 0.05);
    CHECK_THROWS_AS(obs.apply(a.sample_factor(0, other), other, 1.0), std::invalid_argument);
  }
  SUBCASE("non-hermitian matrix is rejected") {
    ComplexMatrix m = ComplexMatrix::Identity(grid.size(), grid.size());
    m(0, 2) = complex(0.0, 1.0);
    CHECK_THROWS_AS(Observable::grid_operator(m, grid, "bad"), ComplianceError);
  }
  SUBCASE("non-compliant grid") {
    CHECK_THROWS_AS(matrix_element(a, b, Observable::identity(), PositionGrid::covering(-2, 2, 0.01)),
                    ComplianceError);
  }
}

TEST_CASE("polynomial observables") {
  const auto obs = Observable::polynomial({1, 0, 0.5}, {0, -2});
  CHECK(obs(2.0, 3.0) == doctest::Approx(1 + 2 - 6));
  CHECK(obs.name() == "1 + 0.5*p^2 + -2*q");
  CHECK(Observable::constant(3)(7, 8) == 3.0);
}

TEST_CASE("single packet state is diagonal") {
  const auto lattice = PhaseGrid::balanced(1.0, 1.0, {0.0, 40.0}, {-10.0, 10.0});
  const auto packets = lattice.enumerate_packets();
  const auto pos = grid_for(packets);
  const auto psi = GridWaveFunction::from_packet(packets[7], pos);
  const auto coeffs = project(psi, lattice);
  for (const auto& obs : {Observable::polynomial({0, 0, 1}, {0, 0, 1}), Observable::position(),
                          Observable::polynomial({}, {5, 1})}) {
    const auto r = expectation_full(coeffs, obs);
    CHECK(r.relative_off_diagonal <= 1e-6);
    CHECK(r.total - r.diagonal - r.off_diagonal == 0.0);
  }
}

TEST_CASE("two distant packets") {
  const auto lattice = PhaseGrid::balanced(1.0, 1.0, {0.0, 40.0}, {-10.0, 10.0});
  const auto packets = lattice.enumerate_packets();
  const auto pos = grid_for(packets);
  const WavePacket chosen[] = {packets[1], packets[10]};  // q = 0 and q = 30
  const complex amps[] = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
  const auto psi = GridWaveFunction::superposition(chosen, amps, pos);
  const auto obs = Observable::position();
  const auto coarse = expectation_full(project(psi, lattice), obs);
  CHECK(coarse.total == doctest::Approx(15.0).epsilon(1e-6));
  CHECK(coarse.relative_off_diagonal <= 1e-4);

  // The same state on a lattice with dq = xi shows its interference.
  const PhaseGrid fine(1.0, 1.0, 1.0, 1.0, {-5.0, 35.0}, {-4.0, 4.0});
  const auto wide = zero_padded(psi, -15.0, 45.0);
  const auto fine_report = expectation_full(project(wide, fine), obs);
  CHECK(fine_report.relative_off_diagonal > 1e4 * coarse.relative_off_diagonal);
}

TEST_CASE("random superposition against the dense oracle") {
  const auto s = random_state(21, 10);
  const auto pos = PositionGrid::covering(-40.0, 100.0, 0.03);
  const auto psi = GridWaveFunction::superposition(s.packets, s.amplitudes, pos);
  const auto lattice = covering_grid(psi, 1.0, 1.0, 10.0, 10.0);
  const auto wide = zero_padded(psi, lattice.q_label(0) - 10, lattice.q_label(lattice.nq() - 1) + 10);
  const auto coeffs = project(wide, lattice);
  const auto rec = reconstruct(coeffs);
  for (const auto& [pc, qc] : std::vector<std::pair<std::vector<double>, std::vector<double>>>{
           {{0, 0, 1}, {0, 0, 1}}, {{0, 1}, {}}, {{}, {-3, 0.5, 0.02}}}) {
    const auto obs = Observable::polynomial(pc, qc);
    const auto r = expectation_full(coeffs, obs);
    double imag = 0.0;
    const double dense =
        dense_expectation(rec.grid(), rec.samples(), dense_polynomial(rec.grid(), pc, qc), &imag);
    CHECK(std::abs(r.total - dense) <= 1e-8 * std::abs(dense));
    CHECK(std::abs(r.imaginary_residue) <= 1e-10 * std::abs(r.total));
    CHECK(std::abs(imag) <= 1e-10 * std::abs(dense));
    CHECK(r.relative_off_diagonal <= 1e-4);
    CHECK(r.total - r.diagonal - r.off_diagonal == 0.0);
  }
  SUBCASE("identity: classical weights sum to the reconstructed norm") {
    const auto r = expectation_full(coeffs, Observable::identity());
    CHECK(r.classical == doctest::Approx(coeffs.sum_squared()).epsilon(1e-12));
    CHECK(std::abs(r.total - rec.norm_squared()) <= 1e-10);
    CHECK(std::abs(r.diagonal - rec.norm_squared()) <= 1e-5);
    for (const auto& c : coeffs.coeffs) CHECK(std::norm(c) >= 0.0);
  }
  SUBCASE("constant observable") {
    const double c = 2.5;
    const auto r = expectation_full(coeffs, Observable::constant(c));
    CHECK(r.total == doctest::Approx(c * rec.norm_squared()).epsilon(1e-10));
    CHECK(std::abs(r.off_diagonal) <= c * 5e-6 * coeffs.sum_squared() * 2);
  }
}

TEST_CASE("engine cache") {
  const auto lattice = PhaseGrid::balanced(1.0, 1.0, {0.0, 30.0}, {-10.0, 10.0});
  const auto packets = lattice.enumerate_packets();
  const auto pos = grid_for(packets);
  const auto obs = Observable::polynomial({0, 0, 1}, {0, 1});
  const ExpectationEngine engine(lattice, pos, obs);
  const auto& m = engine.elements();
  CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  for (std::size_t i = 0; i < packets.size(); i += 3)
    for (std::size_t j = 0; j < packets.size(); j += 2)
      CHECK(std::abs(m(i, j) - matrix_element(packets[i], packets[j], obs, pos)) < 1e-12);
}

TEST_CASE("empty coefficients give zeros") {
  const auto lattice = PhaseGrid::balanced(1.0, 1.0, {0.0, 30.0}, {0.0, 0.0});
  const ProjectionCoefficients none{lattice, PositionGrid(0, 1, 3), {}};
  const auto r = expectation_full(none, Observable::position());
  CHECK(r.total == 0.0);
  CHECK(r.diagonal == 0.0);
  CHECK(r.off_diagonal == 0.0);
  CHECK(r.relative_off_diagonal == 0.0);
}

TEST_CASE("suppression sweep") {
  const auto s = random_state(4, 10);
  const auto pos = PositionGrid::covering(-40.0, 100.0, 0.03);
  const auto psi = GridWaveFunction::superposition(s.packets, s.amplitudes, pos);
  const auto obs = Observable::polynomial({0, 0, 1}, {0, 0, 1});
  const std::vector<std::pair<double, double>> spacings{{2, 2}, {6, 6}, {10, 10}};
  const auto rows = suppression_sweep(psi, obs, 1.0, 1.0, spacings);
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].dq == spacings[k].first);
    const double envelope = std::exp(-rows[k].dq * rows[k].dq / 8.0);
    CHECK(rows[k].report.relative_off_diagonal <= 10.0 * envelope);
  }
  CHECK(rows[2].report.relative_off_diagonal < rows[0].report.relative_off_diagonal);
  CHECK_THROWS_AS(suppression_sweep(psi, obs, 1.0, 1.0, {{4, 4}, {2, 2}}), std::invalid_argument);

  std::ostringstream os;
  write_sweep_csv(os, {rows[2]});
  CHECK(os.str().rfind("dq,dp,total,diagonal,off_diagonal,relative_off_diagonal\n10,10,", 0) == 0);
}

TEST_CASE("slowly varying check") {
  const auto lattice = PhaseGrid::balanced(1.0, 1.0, {0.0, 40.0}, {-10.0, 10.0});
  CHECK(check_slowly_varying(Observable::polynomial({}, {1000, 0.5}), lattice).ok());
  const auto r = check_slowly_varying(Observable::polynomial({0, 0, 1}, {0, 0, 1}), lattice);
  CHECK_FALSE(r.ok());
  CHECK(r.checked == 2 * lattice.size());
  CHECK(r.worst_ratio > 1.0);
}

TEST_CASE("zero padding keeps samples and odd size") {
  const auto pos = PositionGrid::covering(0.0, 10.0, 0.1);
  const auto psi = GridWaveFunction::from_packet(WavePacket::one_dimensional(0.5, 1.0, 5.0), pos);
  const auto w = zero_padded(psi, -3.05, 12.0);
  CHECK(w.size() % 2 == 1);
  CHECK(w.grid().start() <= -3.05);
  CHECK(w.grid().stop() >= 12.0);
  CHECK(w.norm_squared() == doctest::Approx(psi.norm_squared()).epsilon(1e-14));
}
