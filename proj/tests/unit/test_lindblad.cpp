#include <doctest.h>

#include <random>

#include "dicke/error.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/observables.hpp"

using namespace dicke;

namespace {

DensityMatrix random_density(const Basis& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(basis.dim());
  Eigen::MatrixXcd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) a(i, k) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace();
  return {basis, rho, 0.0};
}

// Boson vacuum for the spin, coherent boson amplitude alpha.
DensityMatrix coherent(const Basis& basis, cplx alpha) {
  PureState psi{basis, std::vector<cplx>(basis.dim()), 0.0};
  cplx c = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n <= basis.n_max(); ++n) {
    psi.amplitudes[basis.index(0, n)] = c;
    c *= alpha / std::sqrt(double(n + 1));
  }
  return DensityMatrix::from_pure(psi);
}

}  // namespace

TEST_CASE("dense right-hand side matches the textbook dissipator") {
  std::mt19937_64 rng(41);
  const DickeParams p{2, 1.0, 1.2, 5};
  const Basis basis(p);
  const auto h = hamiltonian(p, basis, 0.6);
  const NoiseParams noise{0.3, 0.4};
  const DensityMatrix rho = random_density(basis, rng);
  const Eigen::MatrixXcd H = h.to_dense().cast<cplx>();
  const Eigen::MatrixXcd a = annihilation_operator(basis).to_dense().cast<cplx>();
  const Eigen::MatrixXcd ad = a.adjoint();
  const cplx i{0.0, 1.0};
  auto diss = [&](const Eigen::MatrixXcd& o) {
    return Eigen::MatrixXcd(o * rho.rho * o.adjoint() - 0.5 * (o.adjoint() * o * rho.rho + rho.rho * o.adjoint() * o));
  };
  const Eigen::MatrixXcd expect =
      -i * (H * rho.rho - rho.rho * H) + 2 * 0.3 * 1.4 * diss(a) + 2 * 0.3 * 0.4 * diss(ad);
  const Eigen::MatrixXcd got = lindblad_rhs(rho.rho, h, basis, noise);
  CHECK((got - expect).norm() < 1e-12);
  CHECK(std::abs(got.trace()) < 1e-12);
  CHECK((got - got.adjoint()).norm() < 1e-12);
}

TEST_CASE("vacuum is the fixed point of the zero-temperature dissipator") {
  const DickeParams p{2, 1.0, 1.0, 4};
  const Basis basis(p);
  const DensityMatrix vac = DensityMatrix::from_pure(initial_state(basis));
  BandedOperator zero = number_operator(basis);
  for (auto& b : zero.bands) std::fill(b.begin(), b.end(), 0.0);
  CHECK(lindblad_rhs(vac.rho, zero, basis, {0.7, 0.0}).norm() < 1e-15);
  // Unitary limit is a bare commutator.
  std::mt19937_64 rng(3);
  const DensityMatrix rho = random_density(basis, rng);
  const auto h = hamiltonian(p, basis, 0.4);
  const Eigen::MatrixXcd H = h.to_dense().cast<cplx>();
  CHECK((lindblad_rhs(rho.rho, h, basis, {}) - cplx{0, -1} * (H * rho.rho - rho.rho * H)).norm() < 1e-13);
  CHECK_THROWS_AS(lindblad_rhs(Eigen::MatrixXcd::Zero(3, 3), h, basis, {}), ConfigError);
}

TEST_CASE("fourth-order convergence of the open propagator") {
  const DickeParams p{3, 1.0, 1.0, 12};
  const Basis basis(p);
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, 0.0);
  auto final_rho = [&](double h) {
    OpenControl ctrl;
    ctrl.base.check_leakage = false;
    ctrl.base.fixed_step = h;
    return propagate_open(DensityMatrix::from_pure(initial_state(basis)), p, s, {0.05, 0.2}, {0.0, s.tau()}, ctrl)
        .snapshots.back()
        .rho.rho;
  };
  const Eigen::MatrixXcd exact = final_rho(0.0025);
  const double e1 = (final_rho(0.2) - exact).norm();
  const double e2 = (final_rho(0.1) - exact).norm();
  MESSAGE("error(h)=" << e1 << " error(h/2)=" << e2 << " ratio=" << e1 / e2);
  CHECK(e1 / e2 >= 6.4);
}

TEST_CASE("property: trace distance to the damped fixed point decays monotonically") {
  std::mt19937_64 rng(47);
  const DickeParams p{1, 1.0, 1.0, 20};
  const Basis basis(p);
  const PulseSchedule s(0.0, 12.0);
  // Boson-only random start: spin in its lowest state.
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k) a(i, k) = {g(rng), g(rng)};
  Eigen::MatrixXcd small = a * a.adjoint();
  small /= small.trace();
  DensityMatrix rho0{basis, Eigen::MatrixXcd::Zero(42, 42), 0.0};
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k) rho0.rho(basis.index(0, i), basis.index(0, k)) = small(i, k);
  const DensityMatrix ss = DensityMatrix::from_pure(initial_state(basis));
  const OpenTrajectory traj = propagate_open(rho0, p, s, {0.2, 0.0}, uniform_times(12.0, 25));
  double previous = 2.0;
  for (const auto& snap : traj.snapshots) {
    const Eigen::MatrixXcd d = snap.rho.rho - ss.rho;
    const double dist = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (d + d.adjoint())).eigenvalues().cwiseAbs().sum();
    CHECK(dist <= previous + 1e-12);
    previous = dist;
  }
  CHECK(previous < 0.1);
}

TEST_CASE("zero damping reproduces the unitary cycle") {
  const DickeParams p{3, 1.0, 1.0, 14};
  const Basis basis(p);
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, -1.0);
  const auto times = uniform_times(s.tau(), 5);
  IntegratorControl ctrl;
  ctrl.check_leakage = false;
  const Trajectory pure = propagate(initial_state(basis), p, s, times, ctrl);
  OpenControl octrl;
  octrl.base = ctrl;
  const OpenTrajectory open = propagate_open(DensityMatrix::from_pure(initial_state(basis)), p, s, {}, times, octrl);
  REQUIRE(open.snapshots.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& psi = pure.snapshots[k].state.amplitudes;
    const Eigen::Map<const Eigen::VectorXcd> v(psi.data(), static_cast<Eigen::Index>(psi.size()));
    const double f = (v.adjoint() * open.snapshots[k].rho.rho * v)(0, 0).real();
    CHECK(f >= 1.0 - 1e-9);
  }
}

TEST_CASE("damped cavity: coherent amplitude decays as alpha exp(-(kappa + i omega) t)") {
  const DickeParams p{1, 1.0, 1.3, 30};
  const Basis basis(p);
  const cplx alpha{1.5, -0.4};
  const double kappa = 0.15;
  const PulseSchedule s(0.0, 8.0);
  OpenControl ctrl;
  const OpenTrajectory traj = propagate_open(coherent(basis, alpha), p, s, {kappa, 0.0}, uniform_times(8.0, 5), ctrl);
  const auto a = annihilation_operator(basis);
  for (const auto& snap : traj.snapshots) {
    const cplx expect = alpha * std::exp(-cplx{kappa, 1.3} * snap.t);
    CHECK(std::abs(expectation(a, snap.rho) - expect) < 1e-7);
  }
}

TEST_CASE("thermal bath: photon number relaxes to n_bar at rate 2 kappa") {
  const DickeParams p{1, 1.0, 1.0, 30};
  const Basis basis(p);
  const NoiseParams noise{0.1, 0.5};
  const PulseSchedule s(0.0, 30.0);
  const OpenTrajectory traj =
      propagate_open(DensityMatrix::from_pure(initial_state(basis)), p, s, noise, uniform_times(30.0, 7));
  for (const auto& snap : traj.snapshots) {
    const double expect = 0.5 * (1.0 - std::exp(-0.2 * snap.t));
    CHECK(scalar_observables(snap.rho).photon_number == doctest::Approx(expect).epsilon(1e-7));
  }
  CHECK(scalar_observables(traj.snapshots.back().rho).photon_number == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("property: trace, hermiticity and positivity are preserved under driving and loss") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const DickeParams p{1 + trial, 1.0, 1.0, 12};
    const Basis basis(p);
    const PulseSchedule s = PulseSchedule::from_log2_velocity(0.3 + 0.5 * u(rng), -1.0 + u(rng));
    const NoiseParams noise{0.05 * u(rng), 0.3 * u(rng)};
    OpenControl ctrl;
    ctrl.base.check_leakage = false;
    const OpenTrajectory traj =
        propagate_open(DensityMatrix::from_pure(initial_state(basis)), p, s, noise, uniform_times(s.tau(), 5), ctrl);
    // The truncated a^dag channel leaks a little trace through the top Fock level.
    CHECK(traj.stats.max_trace_drift <= 1e-8);
    CHECK(traj.stats.max_hermiticity_drift <= 1e-10);
    CHECK(traj.stats.min_eigenvalue >= -1e-8);
    for (const auto& snap : traj.snapshots) {
      CHECK(std::abs(snap.rho.rho.trace() - 1.0) <= 1e-8);
      CHECK((snap.rho.rho - snap.rho.rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("open propagation refuses oversized or invalid problems") {
  const DickeParams p{7, 1.0, 1.0, 200};
  const Basis basis(p);
  DensityMatrix rho{basis, Eigen::MatrixXcd::Zero(1, 1), 0.0};
  CHECK_THROWS_AS(propagate_open(rho, p, PulseSchedule(1.0, 1.0), {0.01, 0.0}, {0.0, 1.0}), ResourceError);
  CHECK_THROWS_AS((NoiseParams{-1.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((NoiseParams{0.1, -0.1}.validate()), ConfigError);
}
