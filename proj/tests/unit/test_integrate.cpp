#include <doctest.h>

#include <random>

#include "dicke/error.hpp"
#include "dicke/integrate.hpp"
#include "dicke/kernels.hpp"
#include "oracles.hpp"

using namespace dicke;

namespace {

// The oracles share the truncation, so leakage into the top levels is irrelevant there.
IntegratorControl no_leak_check() {
  IntegratorControl c;
  c.check_leakage = false;
  return c;
}

oracle::Vec as_vec(const PureState& s) {
  return Eigen::Map<const oracle::Vec>(s.amplitudes.data(), static_cast<Eigen::Index>(s.amplitudes.size()));
}

double overlap2(const oracle::Vec& a, const oracle::Vec& b) { return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm()); }

// Collective-space RK4 reference at the given times; the kink at tau/2 is a grid point.
std::vector<oracle::Vec> reference(const DickeParams& p, const PulseSchedule& s, const std::vector<double>& times,
                                   double h) {
  const Basis basis(p);
  const Eigen::MatrixXcd h0 = hamiltonian(p, basis, 0.0).to_dense().cast<cplx>();
  const Eigen::MatrixXcd c = hamiltonian(p, basis, 1.0).to_dense().cast<cplx>() - h0;
  oracle::Vec psi = oracle::Vec::Zero(static_cast<Eigen::Index>(basis.dim()));
  psi(0) = 1.0;
  std::vector<oracle::Vec> out;
  double t = 0.0;
  auto lam = [&](double x) { return s.value_or_zero(x); };
  for (double target : times) {
    if (t < 0.5 * s.tau() && target > 0.5 * s.tau()) {
      psi = oracle::rk4(h0, c, lam, psi, t, 0.5 * s.tau(), h);
      t = 0.5 * s.tau();
    }
    if (target > t) psi = oracle::rk4(h0, c, lam, psi, t, target, h);
    t = target;
    out.push_back(psi);
  }
  return out;
}

}  // namespace

TEST_CASE("Magnus/Chebyshev propagation matches an RK4 reference over a full cycle") {
  for (int n : {1, 3, 5}) {
    const DickeParams p{n, 1.0, 1.0, 14};
    const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, -2.0);
    const auto times = uniform_times(s.tau(), 9);
    const auto ref = reference(p, s, times, 1e-3);
    const Trajectory traj = propagate(initial_state(Basis(p)), p, s, times, no_leak_check());
    REQUIRE(traj.snapshots.size() == times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(traj.snapshots[i].t == doctest::Approx(times[i]));
      CHECK(overlap2(as_vec(traj.snapshots[i].state), ref[i]) > 1.0 - 1e-11);
    }
  }
}

TEST_CASE("collective propagation equals brute-force 2^N x Fock propagation") {
  const DickeParams p{3, 1.0, 1.0, 10};
  const PulseSchedule s = PulseSchedule::from_log2_velocity(0.8, -1.0);
  const oracle::FullSpace full(3, p.n_max, 1.0, 1.0);
  const Basis basis(p);
  oracle::Vec psi = full.lift(initial_state(basis).amplitudes);
  const auto times = uniform_times(s.tau(), 5);
  const Trajectory traj = propagate(initial_state(basis), p, s, times, no_leak_check());
  const oracle::Mat c = full.coupling;
  double t = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    psi = oracle::rk4(full.h0, c, [&](double x) { return s.value_or_zero(x); }, psi, t, times[i], 1e-3);
    t = times[i];
    CHECK(overlap2(full.lift(traj.snapshots[i].state.amplitudes), psi) > 1.0 - 1e-11);
  }
}

TEST_CASE("fourth-order convergence in the step size") {
  const DickeParams p{4, 1.0, 1.0, 12};
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, 0.0);
  const std::vector<double> times{0.0, s.tau()};
  const Basis basis(p);
  auto final_state = [&](double h) {
    IntegratorControl ctrl = no_leak_check();
    ctrl.fixed_step = h;
    return as_vec(propagate(initial_state(basis), p, s, times, ctrl).snapshots.back().state);
  };
  const oracle::Vec exact = final_state(0.0025);
  const double e1 = (final_state(0.2) - exact).norm();
  const double e2 = (final_state(0.1) - exact).norm();
  MESSAGE("error(h)=" << e1 << " error(h/2)=" << e2 << " ratio=" << e1 / e2);
  CHECK(e1 / e2 >= 6.4);
}

TEST_CASE("zero coupling evolves each basis state by its bare phase") {
  const DickeParams p{3, 0.7, 1.3, 5};
  const Basis basis(p);
  PureState psi{basis, std::vector<cplx>(basis.dim()), 0.0};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& a : psi.amplitudes) a = {g(rng), g(rng)};
  const double nrm = psi.norm();
  for (auto& a : psi.amplitudes) a /= nrm;
  const PulseSchedule s(0.0, 5.0);
  IntegratorControl ctrl;
  ctrl.check_leakage = false;
  const Trajectory traj = propagate(psi, p, s, {0.0, 2.5, 7.0}, ctrl);
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    const double t = traj.snapshots[k].t;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
      const double e = 0.7 * basis.m_of(i) + 1.3 * basis.n_of(i);
      const cplx expect = psi.amplitudes[i] * std::polar(1.0, -e * t);
      CHECK(std::abs(traj.snapshots[k].state.amplitudes[i] - expect) < 1e-12);
    }
  }
}

TEST_CASE("property: norm and parity are conserved along random cycles") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nq(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const DickeParams p{nq(rng), 0.5 + u(rng), 0.5 + u(rng), 28};
    const PulseSchedule s = PulseSchedule::from_log2_velocity(0.3 + 0.6 * u(rng), -3.0 + 4.0 * u(rng));
    const Basis basis(p);
    IntegratorControl ctrl;
    ctrl.renormalize_at_snapshots = false;
    IntegratorStats stats;
    double worst_parity = 0.0;
    propagate(initial_state(basis), p, s, uniform_times(s.tau(), 17), ctrl,
              [&](const Snapshot& snap) {
                double par = 0.0;
                for (std::size_t i = 0; i < basis.dim(); ++i) {
                  par += ((basis.k_of(i) + basis.n_of(i)) % 2 ? -1.0 : 1.0) * std::norm(snap.state.amplitudes[i]);
                }
                worst_parity = std::max(worst_parity, std::abs(par - 1.0));
              },
              &stats);
    CHECK(stats.max_norm_drift <= 1e-9 * s.tau());
    CHECK(worst_parity < 1e-8);
  }
}

TEST_CASE("truncation leakage is a numerical error") {
  const DickeParams p{7, 1.0, 1.0, 4};
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, -3.0);
  CHECK_THROWS_AS(propagate(initial_state(Basis(p)), p, s, uniform_times(s.tau(), 9)), NumericalError);
}

TEST_CASE("snapshot validation and helpers") {
  const DickeParams p{2, 1.0, 1.0, 6};
  const Basis basis(p);
  const PulseSchedule s = PulseSchedule::from_log2_velocity(0.5, 0.0);
  CHECK_THROWS_AS(propagate(initial_state(basis), p, s, {0.5, 0.2}), ConfigError);
  const auto t = uniform_times(4.0, 5);
  CHECK(t == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
  const PureState a = initial_state(basis);
  const PureState b = initial_state(Basis(DickeParams{2, 1.0, 1.0, 7}));
  CHECK_THROWS_AS(fidelity(a, b), ConfigError);
  CHECK(fidelity(a, a) == doctest::Approx(1.0));
  IntegratorControl ctrl;
  CHECK(step_for(PulseSchedule::from_log2_velocity(1.0, 3.0), ctrl) == doctest::Approx(1e-2 / 8.0));
  CHECK(step_for(PulseSchedule::from_log2_velocity(1.0, -3.0), ctrl) == doctest::Approx(1e-2));
}

TEST_CASE("runs are bit-reproducible and backend-independent to rounding") {
  const DickeParams p{5, 1.0, 1.0, 20};
  const PulseSchedule s = PulseSchedule::from_log2_velocity(1.0, -2.0);
  const Basis basis(p);
  const auto times = uniform_times(s.tau(), 3);
  const auto r1 = propagate(initial_state(basis), p, s, times).snapshots.back().state.amplitudes;
  const auto r2 = propagate(initial_state(basis), p, s, times).snapshots.back().state.amplitudes;
  CHECK(r1 == r2);
  const auto before = kernels::active_backend();
  const auto other = before == kernels::Backend::scalar ? kernels::Backend::avx2 : kernels::Backend::scalar;
  if (kernels::select(other)) {
    const auto r3 = propagate(initial_state(basis), p, s, times).snapshots.back().state.amplitudes;
    double err = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) err = std::max(err, std::abs(r1[i] - r3[i]));
    CHECK(err < 1e-11);
    kernels::select(before);
  }
}
