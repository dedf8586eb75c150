#include "dicke/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dicke/error.hpp"
#include "dicke/kernels.hpp"

namespace dicke {

void NoiseParams::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be >= 0");
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) throw ConfigError("n_bar must be >= 0");
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const BandedOperator& hamiltonian,
                              const Basis& basis, const NoiseParams& noise) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  if (rho.rows() != d || rho.cols() != d || hamiltonian.dim != basis.dim()) {
    throw ConfigError("lindblad_rhs: dimension mismatch");
  }
  const Eigen::MatrixXcd h = hamiltonian.to_dense().cast<cplx>();
  const Eigen::MatrixXcd a = annihilation_operator(basis).to_dense().cast<cplx>();
  const Eigen::MatrixXcd ad = a.adjoint();
  const cplx minus_i{0.0, -1.0};
  Eigen::MatrixXcd out = minus_i * (h * rho - rho * h);
  const double down = 2.0 * noise.kappa * (noise.n_bar + 1.0);
  const double up = 2.0 * noise.kappa * noise.n_bar;
  if (down != 0.0) {
    const Eigen::MatrixXcd n = ad * a;
    out += down * (a * rho * ad - 0.5 * (n * rho + rho * n));
  }
  if (up != 0.0) {
    const Eigen::MatrixXcd m = a * ad;
    out += up * (ad * rho * a - 0.5 * (m * rho + rho * m));
  }
  return out;
}

double top_level_occupation(const DensityMatrix& rho) {
  const Basis& b = rho.basis;
  double s = 0.0;
  for (int k = 0; k <= b.n_qubits(); ++k) {
    for (int n = std::max(0, b.n_max() - 1); n <= b.n_max(); ++n) {
      const auto i = static_cast<Eigen::Index>(b.index(k, n));
      s += rho.rho(i, i).real();
    }
  }
  return s;
}

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3)/6
constexpr double kAlpha1 = 0.25 + kGaussOffset;
constexpr double kAlpha2 = 0.25 - kGaussOffset;

// Column-major D x D matrix whose columns carry `pad` zero rows above and below,
// stored as separate real and imaginary planes.
class PaddedMatrix {
 public:
  PaddedMatrix(std::size_t n, std::size_t pad)
      : n_(n), pad_(pad), stride_(n + 2 * pad), re_(stride_ * n, 0.0), im_(stride_ * n, 0.0) {}

  std::size_t n() const { return n_; }
  double* re_col(std::size_t j) { return re_.data() + j * stride_ + pad_; }
  double* im_col(std::size_t j) { return im_.data() + j * stride_ + pad_; }
  const double* re_col(std::size_t j) const { return re_.data() + j * stride_ + pad_; }
  const double* im_col(std::size_t j) const { return im_.data() + j * stride_ + pad_; }
  double& re(std::size_t i, std::size_t j) { return re_[j * stride_ + pad_ + i]; }
  double& im(std::size_t i, std::size_t j) { return im_[j * stride_ + pad_ + i]; }
  double re(std::size_t i, std::size_t j) const { return re_[j * stride_ + pad_ + i]; }
  double im(std::size_t i, std::size_t j) const { return im_[j * stride_ + pad_ + i]; }

  void copy_from(const PaddedMatrix& o) {
    re_ = o.re_;
    im_ = o.im_;
  }
  // this += c * o over the whole storage (padding stays zero).
  void add_scaled(double c, const PaddedMatrix& o) {
    const auto& k = kernels::active();
    k.axpby(re_.size(), c, o.re_.data(), 1.0, re_.data());
    k.axpby(im_.size(), c, o.im_.data(), 1.0, im_.data());
  }
  void scale(double c) {
    const auto& k = kernels::active();
    k.axpby(re_.size(), 0.0, re_.data(), c, re_.data());
    k.axpby(im_.size(), 0.0, im_.data(), c, im_.data());
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : re_) m = std::max(m, std::abs(v));
    for (double v : im_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t n_;
  std::size_t pad_;
  std::size_t stride_;
  std::vector<double> re_;
  std::vector<double> im_;
};

// Liouvillian action on Hermitian operators. Hermiticity lets X H be formed as
// (H X)^dag, so only left multiplications by the banded Hamiltonian are needed.
class Liouvillian {
 public:
  Liouvillian(const DickeHamiltonian& ham, const NoiseParams& noise) : ham_(ham) {
    const Basis& b = ham.basis();
    n_ = b.dim();
    pad_ = b.boson_dim() + 1;
    down_ = 2.0 * noise.kappa * (noise.n_bar + 1.0);
    up_ = 2.0 * noise.kappa * noise.n_bar;
    nval_.resize(n_);
    sq_up_.resize(n_);
    sq_dn_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const int n = b.n_of(i);
      nval_[i] = n;
      sq_up_[i] = n < b.n_max() ? std::sqrt(n + 1.0) : 0.0;
      sq_dn_[i] = std::sqrt(static_cast<double>(n));
    }
    view_.n = n_;
    view_.diag = ham.diagonal().data();
    view_.n_bands = 4;
    for (int k = 0; k < 4; ++k) {
      view_.bands[k] = ham.coupling_bands()[static_cast<std::size_t>(k)].data();
      view_.offsets[k] = ham.coupling_offsets()[static_cast<std::size_t>(k)];
    }
  }

  std::size_t n() const { return n_; }
  std::size_t pad() const { return pad_; }

  double norm_bound(double lambda_max) const {
    const auto [lo, hi] = ham_.spectral_bounds(lambda_max);
    const double nmax = static_cast<double>(ham_.basis().n_max());
    return (hi - lo) + down_ * 2.0 * nmax + up_ * (2.0 * nmax + 2.0);
  }

  // y = L(x); tmp is scratch of the same shape.
  void apply(double lambda, const PaddedMatrix& x, PaddedMatrix& tmp, PaddedMatrix& y) const {
    const auto& k = kernels::active();
    for (std::size_t j = 0; j < n_; ++j) {
      k.band_apply(view_, lambda, 0.0, 1.0, x.re_col(j), 0.0, nullptr, tmp.re_col(j));
      k.band_apply(view_, lambda, 0.0, 1.0, x.im_col(j), 0.0, nullptr, tmp.im_col(j));
    }
    // -i (T - T^dag) with T = H X: Re = Im T + (Im T)^T, Im = (Re T)^T - Re T.
    for (std::size_t j = 0; j < n_; ++j) {
      double* yr = y.re_col(j);
      double* yi = y.im_col(j);
      const double* tr = tmp.re_col(j);
      const double* ti = tmp.im_col(j);
      for (std::size_t i = 0; i < n_; ++i) {
        yr[i] = ti[i] + tmp.im(j, i);
        yi[i] = tmp.re(j, i) - tr[i];
      }
    }
    if (down_ == 0.0 && up_ == 0.0) return;
    for (std::size_t j = 0; j < n_; ++j) {
      double* yr = y.re_col(j);
      double* yi = y.im_col(j);
      const double* xr = x.re_col(j);
      const double* xi = x.im_col(j);
      const double nj = nval_[j];
      for (std::size_t i = 0; i < n_; ++i) {
        const double damp = 0.5 * (down_ * (nval_[i] + nj) + up_ * (nval_[i] + nj + 2.0));
        yr[i] -= damp * xr[i];
        yi[i] -= damp * xi[i];
      }
      // a X a^dag: (i, j) <- sqrt((n_i+1)(n_j+1)) X(i+1, j+1)
      if (down_ != 0.0 && sq_up_[j] != 0.0) {
        const double cj = down_ * sq_up_[j];
        const double* xr1 = x.re_col(j + 1) + 1;
        const double* xi1 = x.im_col(j + 1) + 1;
        for (std::size_t i = 0; i < n_; ++i) {
          const double c = cj * sq_up_[i];
          yr[i] += c * xr1[i];
          yi[i] += c * xi1[i];
        }
      }
      // a^dag X a: (i, j) <- sqrt(n_i n_j) X(i-1, j-1)
      if (up_ != 0.0 && sq_dn_[j] != 0.0) {
        const double cj = up_ * sq_dn_[j];
        const double* xr1 = x.re_col(j - 1) - 1;
        const double* xi1 = x.im_col(j - 1) - 1;
        for (std::size_t i = 0; i < n_; ++i) {
          const double c = cj * sq_dn_[i];
          yr[i] += c * xr1[i];
          yi[i] += c * xi1[i];
        }
      }
    }
  }

 private:
  const DickeHamiltonian& ham_;
  std::size_t n_ = 0;
  std::size_t pad_ = 0;
  double down_ = 0.0;
  double up_ = 0.0;
  std::vector<double> nval_;
  std::vector<double> sq_up_;
  std::vector<double> sq_dn_;
  kernels::BandView view_;
};

}  // namespace

void propagate_open(const DensityMatrix& rho0, const DickeParams& params, const PulseSchedule& schedule,
                    const NoiseParams& noise, const std::vector<double>& snapshot_times,
                    const OpenControl& ctrl, const OpenSnapshotSink& sink, OpenStats* stats_out) {
  noise.validate();
  const Basis& basis = rho0.basis;
  if (basis.n_qubits() != params.n_qubits || basis.n_max() != params.n_max) {
    throw ConfigError("propagate_open: state basis does not match parameters");
  }
  if (basis.dim() > ctrl.max_dimension) {
    std::ostringstream os;
    os << "density-matrix dimension " << basis.dim() << " exceeds ceiling " << ctrl.max_dimension;
    throw ResourceError(os.str());
  }
  if (rho0.trace_deviation() > 1e-9 || rho0.hermiticity_deviation() > 1e-10) {
    throw ConfigError("propagate_open: initial density matrix must be Hermitian with unit trace");
  }
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (!(snapshot_times[i] >= rho0.t - 1e-12) || (i > 0 && snapshot_times[i] < snapshot_times[i - 1])) {
      throw ConfigError("propagate_open: snapshot times must be nondecreasing and not before rho0.t");
    }
  }
  const double h = step_for(schedule, ctrl.base);
  if (!(h >= ctrl.base.min_step)) throw NumericalError("step size below minimum");

  const DickeHamiltonian ham(params, basis);
  const Liouvillian liou(ham, noise);
  const std::size_t n = liou.n();
  PaddedMatrix rho(n, liou.pad()), term(n, liou.pad()), next(n, liou.pad()), tmp(n, liou.pad());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      // Hermitian part only; the Liouvillian action assumes exact Hermiticity.
      const cplx v = 0.5 * (rho0.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                            std::conj(rho0.rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))));
      rho.re(i, j) = v.real();
      rho.im(i, j) = v.imag();
    }
  }
  const double bound = liou.norm_bound(schedule.lambda_max());
  const double tol = 1e-17;

  OpenStats stats;
  stats.step = h;
  stats.min_eigenvalue = 1.0;

  auto exp_apply = [&](double s, double lambda) {
    const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(s * bound / ctrl.taylor_radius)));
    const double ds = s / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      term.copy_from(rho);
      const double scale0 = std::max(rho.max_abs(), 1e-300);
      for (int k = 1;; ++k) {
        liou.apply(lambda, term, tmp, next);
        ++stats.liouvillian_applications;
        next.scale(ds / k);
        std::swap(term, next);
        rho.add_scaled(1.0, term);
        if (static_cast<double>(k) > ds * bound && term.max_abs() <= tol * scale0) break;
        if (k > 200) throw NumericalError("Taylor series of the Liouvillian failed to converge");
      }
    }
  };

  double t = rho0.t;
  auto advance_to = [&](double t_end) {
    std::vector<double> marks;
    for (double b : {0.5 * schedule.tau(), schedule.tau()}) {
      if (b > t && b < t_end) marks.push_back(b);
    }
    marks.push_back(t_end);
    for (double seg_end : marks) {
      const double span = seg_end - t;
      if (span <= 0.0) continue;
      const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h - 1e-9)));
      const double dt = span / static_cast<double>(steps);
      const double t0 = t;
      for (std::size_t s = 0; s < steps; ++s) {
        const double ts = t0 + dt * static_cast<double>(s);
        const double l1 = schedule.value_or_zero(ts + (0.5 - kGaussOffset) * dt);
        const double l2 = schedule.value_or_zero(ts + (0.5 + kGaussOffset) * dt);
        exp_apply(0.5 * dt, 2.0 * (kAlpha1 * l1 + kAlpha2 * l2));
        exp_apply(0.5 * dt, 2.0 * (kAlpha2 * l1 + kAlpha1 * l2));
        ++stats.steps;
      }
      t = seg_end;
    }
  };

  DensityMatrix snap{basis, Eigen::MatrixXcd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), 0.0};
  for (double ts : snapshot_times) {
    advance_to(ts);
    t = ts;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        snap.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cplx{rho.re(i, j), rho.im(i, j)};
    snap.t = ts;
    stats.max_trace_drift = std::max(stats.max_trace_drift, snap.trace_deviation());
    stats.max_hermiticity_drift = std::max(stats.max_hermiticity_drift, snap.hermiticity_deviation());
    if (ctrl.check_positivity) {
      const double ev = snap.min_eigenvalue();
      stats.min_eigenvalue = std::min(stats.min_eigenvalue, ev);
      if (ev < -ctrl.positivity_tolerance) {
        std::ostringstream os;
        os << "positivity violated at t=" << ts << ": min eigenvalue " << ev << " (step " << h
           << ", n_max " << basis.n_max() << ")";
        throw NumericalError(os.str());
      }
    }
    const double leak = top_level_occupation(snap);
    stats.max_leakage = std::max(stats.max_leakage, leak);
    if (ctrl.base.check_leakage && leak > ctrl.base.leakage_tolerance) {
      std::ostringstream os;
      os << "truncation leakage " << leak << " at t=" << ts << " exceeds " << ctrl.base.leakage_tolerance
         << " (n_max=" << basis.n_max() << " too small)";
      throw NumericalError(os.str());
    }
    if (sink) sink(OpenSnapshot{ts, schedule.value_or_zero(ts), snap});
  }
  if (stats_out) *stats_out = stats;
}

OpenTrajectory propagate_open(const DensityMatrix& rho0, const DickeParams& params,
                              const PulseSchedule& schedule, const NoiseParams& noise,
                              const std::vector<double>& snapshot_times, const OpenControl& ctrl) {
  OpenTrajectory traj{params, schedule, noise, {}, {}};
  propagate_open(rho0, params, schedule, noise, snapshot_times, ctrl,
                 [&](const OpenSnapshot& s) { traj.snapshots.push_back(s); }, &traj.stats);
  return traj;
}

}  // namespace dicke
