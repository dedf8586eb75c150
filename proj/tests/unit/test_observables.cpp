#include <doctest.h>

#include <random>

#include "dicke/error.hpp"
#include "dicke/integrate.hpp"
#include "dicke/observables.hpp"
#include "oracles.hpp"

using namespace dicke;

namespace {

PureState random_state(const Basis& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  PureState psi{basis, std::vector<cplx>(basis.dim()), 0.0};
  double nrm = 0.0;
  for (auto& a : psi.amplitudes) {
    a = {g(rng), g(rng)};
    nrm += std::norm(a);
  }
  for (auto& a : psi.amplitudes) a /= std::sqrt(nrm);
  return psi;
}

// Coefficient matrix C(k, n) of a pure state.
oracle::Mat coefficients(const PureState& psi) {
  const auto& b = psi.basis;
  oracle::Mat c(static_cast<Eigen::Index>(b.spin_dim()), static_cast<Eigen::Index>(b.boson_dim()));
  for (std::size_t i = 0; i < b.dim(); ++i) c(b.k_of(i), b.n_of(i)) = psi.amplitudes[i];
  return c;
}

}  // namespace

TEST_CASE("entropy of simple states") {
  const Basis basis(DickeParams{2, 1.0, 1.0, 3});
  PureState psi{basis, std::vector<cplx>(basis.dim()), 0.0};
  psi.amplitudes[basis.index(0, 0)] = 1.0;
  CHECK(entanglement_entropy(psi) == doctest::Approx(0.0));
  psi.amplitudes[basis.index(0, 0)] = 1.0 / std::sqrt(2.0);
  psi.amplitudes[basis.index(1, 1)] = 1.0 / std::sqrt(2.0);
  CHECK(entanglement_entropy(psi) == doctest::Approx(1.0));
  psi.amplitudes[basis.index(0, 0)] = 1.0 / std::sqrt(3.0);
  psi.amplitudes[basis.index(1, 1)] = 1.0 / std::sqrt(3.0);
  psi.amplitudes[basis.index(2, 2)] = 1.0 / std::sqrt(3.0);
  CHECK(entanglement_entropy(psi) == doctest::Approx(std::log2(3.0)));
  // Product state with a superposed boson factor stays unentangled.
  std::fill(psi.amplitudes.begin(), psi.amplitudes.end(), cplx{});
  for (int n = 0; n < 4; ++n) psi.amplitudes[basis.index(1, n)] = 0.5;
  CHECK(entanglement_entropy(psi) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("property: reduced-state entropies agree with Schmidt decomposition and each other") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> nq(1, 9), nm(1, 15);
  for (int trial = 0; trial < 50; ++trial) {
    const Basis basis(DickeParams{nq(rng), 1.0, 1.0, nm(rng)});
    const PureState psi = random_state(basis, rng);
    const double s_spin = von_neumann_entropy(reduce(psi, Subsystem::spin));
    const double s_boson = von_neumann_entropy(reduce(psi, Subsystem::boson));
    const double s_svd = oracle::schmidt_entropy(coefficients(psi));
    CHECK(std::abs(s_spin - s_boson) <= 1e-10);
    CHECK(s_spin == doctest::Approx(s_svd).epsilon(1e-10));
    CHECK(entanglement_entropy(psi) == doctest::Approx(s_svd).epsilon(1e-10));
    CHECK(s_spin >= 0.0);
    CHECK(s_spin <= std::log2(double(std::min(basis.spin_dim(), basis.boson_dim()))) + 1e-12);
    const auto rs = reduce(psi, Subsystem::spin);
    CHECK(rs.rho.trace().real() == doctest::Approx(1.0));
    CHECK((rs.rho - rs.rho.adjoint()).norm() < 1e-14);
  }
}

TEST_CASE("property: negativity of pure states equals the Schmidt trace norm") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> nq(1, 5), nm(1, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const Basis basis(DickeParams{nq(rng), 1.0, 1.0, nm(rng)});
    const PureState psi = random_state(basis, rng);
    const double norm1 = oracle::schmidt_trace_norm(coefficients(psi));
    const Negativity dense = negativity(DensityMatrix::from_pure(psi));
    const Negativity shortcut = negativity(psi);
    CHECK(dense.negativity == doctest::Approx(0.5 * (norm1 - 1.0)).epsilon(1e-9));
    CHECK(shortcut.negativity == doctest::Approx(0.5 * (norm1 - 1.0)).epsilon(1e-9));
    CHECK(dense.log_negativity == doctest::Approx(std::log2(norm1)).epsilon(1e-9));
  }
}

TEST_CASE("partial transpose is an involution that preserves trace") {
  std::mt19937_64 rng(29);
  const Basis basis(DickeParams{3, 1.0, 1.0, 4});
  const DensityMatrix rho = DensityMatrix::from_pure(random_state(basis, rng));
  const Eigen::MatrixXcd pt = partial_transpose_spin(rho);
  CHECK(pt.trace().real() == doctest::Approx(1.0));
  CHECK((pt - pt.adjoint()).norm() < 1e-14);
  DensityMatrix back = rho;
  back.rho = pt;
  CHECK((partial_transpose_spin(back) - rho.rho).norm() < 1e-14);
  // Block (k, k') of rho^T_spin is block (k', k) of rho.
  const auto bd = static_cast<Eigen::Index>(basis.boson_dim());
  CHECK((pt.block(0, 2 * bd, bd, bd) - rho.rho.block(2 * bd, 0, bd, bd)).norm() == 0.0);
}

TEST_CASE("mixed separable state has zero negativity") {
  const Basis basis(DickeParams{2, 1.0, 1.0, 2});
  DensityMatrix rho{basis, Eigen::MatrixXcd::Zero(9, 9), 0.0};
  rho.rho(basis.index(0, 0), basis.index(0, 0)) = 0.5;
  rho.rho(basis.index(1, 1), basis.index(1, 1)) = 0.5;
  CHECK(negativity(rho).negativity == doctest::Approx(0.0));
  CHECK(negativity(rho).log_negativity == doctest::Approx(0.0));
}

TEST_CASE("scalar observables and expectations agree between pure and density forms") {
  std::mt19937_64 rng(31);
  const Basis basis(DickeParams{4, 1.0, 1.0, 6});
  const PureState psi = random_state(basis, rng);
  const DensityMatrix rho = DensityMatrix::from_pure(psi);
  const auto a = scalar_observables(psi);
  const auto b = scalar_observables(rho);
  CHECK(a.jz == doctest::Approx(b.jz));
  CHECK(a.photon_number == doctest::Approx(b.photon_number));
  CHECK(a.parity == doctest::Approx(b.parity));
  const auto x = jx_operator(basis);
  CHECK(std::abs(expectation(x, psi) - expectation(x, rho)) < 1e-12);
  CHECK(std::abs(expectation(x, psi).imag()) < 1e-14);
  const PureState vac = initial_state(basis);
  const auto v = scalar_observables(vac);
  CHECK(v.jz == doctest::Approx(-2.0));
  CHECK(v.photon_number == 0.0);
  CHECK(v.parity == doctest::Approx(1.0));
  CHECK(v.s_bits == doctest::Approx(0.0));
}

TEST_CASE("entropy rejects clearly negative spectra and clips round-off") {
  ReducedState r{Subsystem::spin, Eigen::MatrixXcd::Zero(2, 2)};
  r.rho(0, 0) = 1.0 + 1e-9;
  r.rho(1, 1) = -1e-9;
  CHECK(von_neumann_entropy(r) == doctest::Approx(0.0).epsilon(1e-7));
  r.rho(0, 0) = 1.1;
  r.rho(1, 1) = -0.1;
  CHECK_THROWS_AS(von_neumann_entropy(r), NumericalError);
}
