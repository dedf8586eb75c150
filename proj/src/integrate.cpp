#include "dicke/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "dicke/error.hpp"
#include "dicke/kernels.hpp"

namespace dicke {

PureState initial_state(const Basis& basis) {
  PureState psi{basis, std::vector<cplx>(basis.dim(), cplx{0.0, 0.0}), 0.0};
  psi.amplitudes[basis.index(0, 0)] = 1.0;
  return psi;
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.basis != b.basis || a.amplitudes.size() != b.amplitudes.size()) {
    throw ConfigError("fidelity: basis mismatch");
  }
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return std::min(1.0, std::norm(s));
}

std::vector<double> uniform_times(double tau, std::size_t count) {
  if (count < 2) throw ConfigError("need at least two snapshot times");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = tau * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = tau;
  return out;
}

double step_for(const PulseSchedule& schedule, const IntegratorControl& ctrl) {
  if (ctrl.fixed_step > 0.0) return ctrl.fixed_step;
  const double ups = schedule.upsilon();
  return ups > 1.0 ? ctrl.base_step / ups : ctrl.base_step;
}

double top_level_occupation(const PureState& psi) {
  const Basis& b = psi.basis;
  double s = 0.0;
  for (int k = 0; k <= b.n_qubits(); ++k) {
    for (int n = std::max(0, b.n_max() - 1); n <= b.n_max(); ++n) s += std::norm(psi.amplitudes[b.index(k, n)]);
  }
  return s;
}

namespace {

// Two-exponential commutator-free Magnus scheme with Gauss-Legendre nodes.
constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3)/6
constexpr double kAlpha1 = 0.25 + kGaussOffset;
constexpr double kAlpha2 = 0.25 - kGaussOffset;

// Zero-padded split real/imaginary storage so banded stencils read past the ends.
class PaddedVector {
 public:
  PaddedVector(std::size_t n, std::size_t pad) : n_(n), pad_(pad), re_(n + 2 * pad, 0.0), im_(n + 2 * pad, 0.0) {}
  double* re() { return re_.data() + pad_; }
  double* im() { return im_.data() + pad_; }
  const double* re() const { return re_.data() + pad_; }
  const double* im() const { return im_.data() + pad_; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::size_t pad_;
  std::vector<double> re_;
  std::vector<double> im_;
};

// exp(-i s H(lambda)) applied through a Chebyshev series on [lo, hi], valid for any
// lambda within the bound used to build the window.
class ChebyshevExponential {
 public:
  ChebyshevExponential(const DickeHamiltonian& ham, double lambda_bound, double tol)
      : ham_(ham), tol_(tol) {
    const auto [lo, hi] = ham.spectral_bounds(lambda_bound);
    // Small widening keeps the mapped spectrum strictly inside [-1, 1].
    center_ = 0.5 * (hi + lo);
    radius_ = 0.5 * (hi - lo) * (1.0 + 1e-6) + 1e-12;
    const auto& bands = ham.coupling_bands();
    const auto& offs = ham.coupling_offsets();
    view_.n = ham.basis().dim();
    view_.diag = ham.diagonal().data();
    view_.n_bands = 4;
    for (int b = 0; b < 4; ++b) {
      view_.bands[b] = bands[static_cast<std::size_t>(b)].data();
      view_.offsets[b] = offs[static_cast<std::size_t>(b)];
    }
    pad_ = static_cast<std::size_t>(ham.basis().boson_dim()) + 1;
  }

  std::size_t pad() const { return pad_; }
  std::size_t matvecs() const { return matvecs_; }

  void apply(double s, double lambda, PaddedVector& v, PaddedVector& w0, PaddedVector& w1,
             PaddedVector& w2) {
    const auto& c = coefficients(s);
    const auto& k = kernels::active();
    const std::size_t n = v.size();
    // w0 = v; v accumulates the series.
    std::copy(v.re(), v.re() + n, w0.re());
    std::copy(v.im(), v.im() + n, w0.im());
    k.axpby(n, 0.0, w0.re(), c[0], v.re());
    k.axpby(n, 0.0, w0.im(), c[0], v.im());
    if (c.size() > 1) {
      k.band_apply(view_, lambda, center_, 1.0 / radius_, w0.re(), 0.0, nullptr, w1.re());
      k.band_apply(view_, lambda, center_, 1.0 / radius_, w0.im(), 0.0, nullptr, w1.im());
      matvecs_ += 1;
      accumulate(1, c[1], w1, v);
    }
    PaddedVector* prev = &w0;
    PaddedVector* cur = &w1;
    PaddedVector* next = &w2;
    for (std::size_t j = 2; j < c.size(); ++j) {
      k.band_apply(view_, lambda, center_, 2.0 / radius_, cur->re(), -1.0, prev->re(), next->re());
      k.band_apply(view_, lambda, center_, 2.0 / radius_, cur->im(), -1.0, prev->im(), next->im());
      matvecs_ += 1;
      accumulate(j, c[j], *next, v);
      std::swap(prev, cur);
      std::swap(cur, next);
    }
    // Global phase exp(-i s center).
    const double ph = -s * center_;
    const double cr = std::cos(ph);
    const double ci = std::sin(ph);
    double* vr = v.re();
    double* vi = v.im();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = vr[i];
      const double b = vi[i];
      vr[i] = cr * a - ci * b;
      vi[i] = cr * b + ci * a;
    }
  }

 private:
  // The series sum_j (2 - delta_j0) (-i)^j J_j(s r) T_j(Hs); the (-i)^j factor is
  // applied in accumulate(), so only the real Bessel weights are stored.
  const std::vector<double>& coefficients(double s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    const double x = s * radius_;
    std::vector<double> c;
    for (unsigned j = 0;; ++j) {
      const double bj = std::cyl_bessel_j(static_cast<double>(j), x);
      c.push_back(j == 0 ? bj : 2.0 * bj);
      if (static_cast<double>(j) > x && std::abs(bj) < tol_ && j >= 2) break;
      if (j > 100000) throw NumericalError("Chebyshev series failed to converge");
    }
    return cache_.emplace(s, std::move(c)).first->second;
  }

  // v (excluding w0 term already placed) += (-i)^j * cj * w
  static void accumulate(std::size_t j, double cj, const PaddedVector& w, PaddedVector& v) {
    double ar = 0.0;
    double ai = 0.0;
    switch (j % 4) {
      case 0: ar = cj; break;
      case 1: ai = -cj; break;
      case 2: ar = -cj; break;
      default: ai = cj; break;
    }
    kernels::active().complex_axpy(v.size(), ar, ai, w.re(), w.im(), v.re(), v.im());
  }

  const DickeHamiltonian& ham_;
  double tol_;
  double center_ = 0.0;
  double radius_ = 1.0;
  std::size_t pad_ = 0;
  kernels::BandView view_;
  std::map<double, std::vector<double>> cache_;
  std::size_t matvecs_ = 0;
};

}  // namespace

void propagate(const PureState& state, const DickeParams& params, const PulseSchedule& schedule,
               const std::vector<double>& snapshot_times, const IntegratorControl& ctrl,
               const SnapshotSink& sink, IntegratorStats* stats_out) {
  if (state.basis.n_qubits() != params.n_qubits || state.basis.n_max() != params.n_max) {
    throw ConfigError("propagate: state basis does not match parameters");
  }
  if (std::abs(state.norm() - 1.0) > 1e-9) throw ConfigError("propagate: state is not normalized");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (!(snapshot_times[i] >= state.t - 1e-12) || (i > 0 && snapshot_times[i] < snapshot_times[i - 1])) {
      throw ConfigError("propagate: snapshot times must be nondecreasing and not before the state time");
    }
  }
  const double h = step_for(schedule, ctrl);
  if (!(h >= ctrl.min_step)) {
    std::ostringstream os;
    os << "step size " << h << " below minimum " << ctrl.min_step;
    throw NumericalError(os.str());
  }

  const Basis& basis = state.basis;
  const DickeHamiltonian ham(params, basis);
  ChebyshevExponential expo(ham, schedule.lambda_max(), ctrl.chebyshev_tolerance);
  const std::size_t n = basis.dim();
  const std::size_t pad = expo.pad();
  PaddedVector psi(n, pad), w0(n, pad), w1(n, pad), w2(n, pad);
  for (std::size_t i = 0; i < n; ++i) {
    psi.re()[i] = state.amplitudes[i].real();
    psi.im()[i] = state.amplitudes[i].imag();
  }

  IntegratorStats stats;
  stats.step = h;
  double t = state.t;

  auto advance_to = [&](double t_end) {
    // Steps never straddle the pulse apex or its end, where lambda(t) has kinks.
    std::vector<double> marks;
    for (double b : {0.5 * schedule.tau(), schedule.tau()}) {
      if (b > t && b < t_end) marks.push_back(b);
    }
    marks.push_back(t_end);
    for (double seg_end : marks) {
      const double span = seg_end - t;
      if (span <= 0.0) continue;
      const auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-9));
      const double dt = span / static_cast<double>(std::max<std::size_t>(steps, 1));
      const double t0 = t;
      for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
        const double ts = t0 + dt * static_cast<double>(s);
        const double l1 = schedule.value_or_zero(ts + (0.5 - kGaussOffset) * dt);
        const double l2 = schedule.value_or_zero(ts + (0.5 + kGaussOffset) * dt);
        // alpha1 H1 + alpha2 H2 = (1/2) H(2 (alpha1 l1 + alpha2 l2)) since H is affine in lambda.
        const double la = 2.0 * (kAlpha1 * l1 + kAlpha2 * l2);
        const double lb = 2.0 * (kAlpha2 * l1 + kAlpha1 * l2);
        expo.apply(0.5 * dt, la, psi, w0, w1, w2);
        expo.apply(0.5 * dt, lb, psi, w0, w1, w2);
        ++stats.steps;
      }
      t = seg_end;
    }
  };

  PureState snap{basis, std::vector<cplx>(n), 0.0};
  for (double ts : snapshot_times) {
    advance_to(ts);
    t = ts;
    const auto& k = kernels::active();
    const double nrm = std::sqrt(k.sum_squares(n, psi.re()) + k.sum_squares(n, psi.im()));
    const double drift = std::abs(nrm - 1.0);
    stats.max_norm_drift = std::max(stats.max_norm_drift, drift);
    if (ctrl.renormalize_at_snapshots && nrm > 0.0) {
      stats.cumulative_norm_drift += drift;
      k.axpby(n, 0.0, psi.re(), 1.0 / nrm, psi.re());
      k.axpby(n, 0.0, psi.im(), 1.0 / nrm, psi.im());
    }
    for (std::size_t i = 0; i < n; ++i) snap.amplitudes[i] = cplx{psi.re()[i], psi.im()[i]};
    snap.t = ts;
    const double leak = top_level_occupation(snap);
    stats.max_leakage = std::max(stats.max_leakage, leak);
    if (ctrl.check_leakage && leak > ctrl.leakage_tolerance) {
      std::ostringstream os;
      os << "truncation leakage " << leak << " at t=" << ts << " exceeds " << ctrl.leakage_tolerance
         << " (n_max=" << basis.n_max() << " too small)";
      throw NumericalError(os.str());
    }
    if (sink) sink(Snapshot{ts, schedule.value_or_zero(ts), snap});
  }
  stats.matvecs = expo.matvecs();
  if (stats_out) *stats_out = stats;
}

Trajectory propagate(const PureState& state, const DickeParams& params, const PulseSchedule& schedule,
                     const std::vector<double>& snapshot_times, const IntegratorControl& ctrl) {
  Trajectory traj{params, schedule, {}, {}};
  traj.snapshots.reserve(snapshot_times.size());
  propagate(state, params, schedule, snapshot_times, ctrl,
            [&](const Snapshot& s) { traj.snapshots.push_back(s); }, &traj.stats);
  return traj;
}

}  // namespace dicke
