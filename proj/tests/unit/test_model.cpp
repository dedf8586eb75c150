#include <doctest.h>

#include <random>

#include "dicke/error.hpp"
#include "dicke/model.hpp"
#include "oracles.hpp"

using namespace dicke;

namespace {

Eigen::MatrixXcd collective_dense(const DickeParams& p, double lambda) {
  const Basis basis(p);
  return hamiltonian(p, basis, lambda).to_dense().cast<cplx>();
}

}  // namespace

TEST_CASE("collective Hamiltonian is the symmetric-sector projection of the 2^N x Fock Hamiltonian") {
  for (int n : {1, 2, 3, 4}) {
    const DickeParams p{n, 0.8, 1.3, 6};
    const oracle::FullSpace full(n, p.n_max, p.epsilon, p.omega);
    for (double lambda : {0.0, 0.37, 1.0, 2.5}) {
      const Eigen::MatrixXcd projected = full.isometry.adjoint() * full.hamiltonian(lambda) * full.isometry;
      CHECK((projected - collective_dense(p, lambda)).norm() < 1e-12);
    }
    // The isometry has orthonormal columns and the symmetric sector is invariant.
    const auto& v = full.isometry;
    CHECK((v.adjoint() * v - Eigen::MatrixXcd::Identity(v.cols(), v.cols())).norm() < 1e-12);
    const Eigen::MatrixXcd h = full.hamiltonian(0.9);
    CHECK((h * v - v * (v.adjoint() * h * v)).norm() < 1e-12);
  }
}

TEST_CASE("ground state lies in the symmetric sector: energy matches the full-space minimum") {
  const DickeParams p{4, 1.0, 1.0, 20};
  const Basis basis(p);
  const oracle::FullSpace full(4, p.n_max, 1.0, 1.0);
  for (double lambda : {0.0, 0.3, 0.6, 1.0}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(full.hamiltonian(lambda));
    const GroundState gs = ground_state(p, basis, lambda);
    CHECK(gs.energy == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  }
}

TEST_CASE("ground state at zero coupling") {
  const DickeParams p{6, 0.7, 1.1, 8};
  const Basis basis(p);
  const GroundState gs = ground_state(p, basis, 0.0);
  CHECK(gs.energy == doctest::Approx(-0.7 * 3.0));
  CHECK(gs.gap == doctest::Approx(0.7));
  CHECK(std::abs(gs.amplitudes[basis.index(0, 0)]) == doctest::Approx(1.0));
}

TEST_CASE("ground state keeps even parity deep in the superradiant phase") {
  const DickeParams p{16, 1.0, 1.0, 40};
  const Basis basis(p);
  const GroundState gs = ground_state(p, basis, 1.0);
  const auto pi = parity_operator(basis);
  double parity = 0.0;
  for (std::size_t i = 0; i < basis.dim(); ++i) parity += pi.bands[0][i] * std::norm(gs.amplitudes[i]);
  CHECK(parity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gs.gap < 1e-6);
}

TEST_CASE("ground_state refuses dense problems above the cap") {
  const DickeParams p{7, 1.0, 1.0, 40};
  const Basis basis(p);
  CHECK_THROWS_AS(ground_state(p, basis, 0.5, 100), ResourceError);
}

TEST_CASE("property: H is real symmetric, parity-conserving and inside its spectral bounds") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nq(1, 9), nm(1, 20);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const DickeParams p{nq(rng), u(rng), u(rng), nm(rng)};
    const Basis basis(p);
    const double lmax = u(rng);
    const double lambda = lmax * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Eigen::MatrixXd h = hamiltonian(p, basis, lambda).to_dense();
    CHECK((h - h.transpose()).norm() == 0.0);
    const Eigen::MatrixXd pi = parity_operator(basis).to_dense();
    CHECK((pi * h - h * pi).norm() < 1e-12);
    const auto [lo, hi] = DickeHamiltonian(p, basis).spectral_bounds(lmax);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    CHECK(es.eigenvalues().minCoeff() >= lo - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= hi + 1e-12);
  }
}

TEST_CASE("collective operators have the angular-momentum matrix elements") {
  const DickeParams p{5, 1.0, 1.0, 3};
  const Basis basis(p);
  const Eigen::MatrixXd jx = jx_operator(basis).to_dense();
  const Eigen::MatrixXd jz = jz_operator(basis).to_dense();
  const Eigen::MatrixXd a = annihilation_operator(basis).to_dense();
  const Eigen::MatrixXd ad = creation_operator(basis).to_dense();
  const Eigen::MatrixXd nop = number_operator(basis).to_dense();
  const double j = basis.j();
  for (int k = 0; k + 1 <= 5; ++k) {
    const double m = k - j;
    const double up = 0.5 * std::sqrt(j * (j + 1) - m * (m + 1));
    CHECK(jx(basis.index(k + 1, 2), basis.index(k, 2)) == doctest::Approx(up));
    CHECK(jx(basis.index(k, 2), basis.index(k + 1, 2)) == doctest::Approx(up));
  }
  CHECK(jz(basis.index(5, 0), basis.index(5, 0)) == doctest::Approx(2.5));
  CHECK((ad - a.transpose()).norm() == 0.0);
  CHECK((a.transpose() * a - nop).norm() < 1e-12);
  // tr Jx^2 over the spin factor is j(j+1)(2j+1)/3.
  const double trace_jx2 = (jx * jx).trace() / basis.boson_dim();
  CHECK(trace_jx2 == doctest::Approx(j * (j + 1) * (2 * j + 1) / 3.0));
}

TEST_CASE("triangular pulse") {
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, -3.0);
  CHECK(s.tau() == doctest::Approx(16.0));
  CHECK(s.upsilon() == doctest::Approx(0.125));
  CHECK(s.value(0.0) == 0.0);
  CHECK(s.value(8.0) == doctest::Approx(1.0));
  CHECK(s.value(16.0) == 0.0);
  CHECK(s.value(4.0) == doctest::Approx(0.5));
  CHECK(s.value_or_zero(20.0) == 0.0);
  CHECK_THROWS_AS(s.value(-0.1), ConfigError);
  CHECK_THROWS_AS(s.value(16.5), ConfigError);
  CHECK_THROWS_AS(PulseSchedule::from_velocity(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(PulseSchedule(1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(PulseSchedule(-1.0, 1.0), ConfigError);
  CHECK_NOTHROW(PulseSchedule(0.0, 3.0));
}

TEST_CASE("property: pulse is time-symmetric and bounded") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lmax = 0.1 + 2.0 * u(rng);
    const PulseSchedule s = PulseSchedule::from_log2_velocity(lmax, -12.0 + 16.0 * u(rng));
    const double t = s.tau() * u(rng);
    CHECK(std::abs(s.value(t) - s.value(s.tau() - t)) <= 1e-12 * lmax);
    CHECK(s.value(t) >= 0.0);
    CHECK(s.value(t) <= lmax * (1.0 + 1e-15));
    CHECK(s.tau() == doctest::Approx(2.0 * lmax / s.upsilon()));
  }
}

TEST_CASE("basis indexing and limits") {
  const DickeParams p{4, 1.0, 1.0, 9};
  const Basis b(p);
  CHECK(b.dim() == 50);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    CHECK(b.index(b.k_of(i), b.n_of(i)) == i);
    CHECK(b.index_m(b.m_of(i), b.n_of(i)) == i);
  }
  CHECK_THROWS_AS(b.index_m(0.5, 0), ConfigError);
  CHECK_THROWS_AS(Basis(DickeParams{0, 1.0, 1.0, 4}), ConfigError);
  CHECK_THROWS_AS(Basis(DickeParams{4, -1.0, 1.0, 4}), ConfigError);
  CHECK_THROWS_AS(Basis(DickeParams{100, 1.0, 1.0, 100000}), ResourceError);
  CHECK(DickeParams{4, 1.0, 1.0, 4}.critical_coupling() == doctest::Approx(0.5));
  CHECK(DickeParams{4, 4.0, 1.0, 4}.critical_coupling() == doctest::Approx(1.0));
  CHECK_THROWS_AS(hamiltonian(p, b, -0.1), ConfigError);
}
