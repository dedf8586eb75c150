#pragma once

// Independent reference constructions used by the unit and acceptance tests.
// Nothing here calls the library's propagators or banded operators.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline double binomial(int n, int k) { return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))); }

/// Pieces of H = eps * sum sz/2 + omega a^dag a + (2 lambda / sqrt N) (sum sx/2)(a + a^dag)
/// on the full 2^N (x) Fock(n_max + 1) space. Bit q of the spin index set = qubit q up.
struct FullSpace {
  int n_qubits;
  int n_max;
  Mat h0;        // lambda-independent part
  Mat coupling;  // multiplies lambda
  Mat isometry;  // collective (k, n) -> full, columns are symmetric Dicke states

  FullSpace(int n, int nm, double eps, double omega) : n_qubits(n), n_max(nm) {
    const int spins = 1 << n;
    const int bd = nm + 1;
    const int dim = spins * bd;
    h0 = Mat::Zero(dim, dim);
    coupling = Mat::Zero(dim, dim);
    for (int b = 0; b < spins; ++b) {
      int up = 0;
      for (int q = 0; q < n; ++q) up += (b >> q) & 1;
      for (int m = 0; m <= nm; ++m) {
        h0(b * bd + m, b * bd + m) = eps * (up - 0.5 * n) + omega * m;
        for (int q = 0; q < n; ++q) {
          const int flipped = b ^ (1 << q);
          // (sx_q / 2) (a + a^dag)
          if (m + 1 <= nm) coupling(flipped * bd + m + 1, b * bd + m) += 0.5 * std::sqrt(m + 1.0);
          if (m >= 1) coupling(flipped * bd + m - 1, b * bd + m) += 0.5 * std::sqrt(double(m));
        }
      }
    }
    coupling *= 2.0 / std::sqrt(double(n));
    isometry = Mat::Zero(dim, (n + 1) * bd);
    for (int b = 0; b < spins; ++b) {
      int up = 0;
      for (int q = 0; q < n; ++q) up += (b >> q) & 1;
      const double w = 1.0 / std::sqrt(binomial(n, up));
      for (int m = 0; m <= nm; ++m) isometry(b * bd + m, up * bd + m) = w;
    }
  }

  Mat hamiltonian(double lambda) const { return h0 + lambda * coupling; }
  /// Collective amplitudes (k = m + j major, n minor) lifted into the full space.
  Vec lift(const std::vector<cplx>& collective) const {
    return isometry * Eigen::Map<const Vec>(collective.data(), static_cast<Eigen::Index>(collective.size()));
  }
};

/// Classical fourth-order Runge-Kutta for i psi' = (h0 + lambda(t) coupling) psi with a
/// fixed step; the caller must make t0 -> t1 not straddle a kink of lambda(t).
template <class Lambda>
Vec rk4(const Mat& h0, const Mat& coupling, Lambda&& lambda, Vec psi, double t0, double t1, double h) {
  const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
  const double dt = (t1 - t0) / steps;
  const cplx mi(0.0, -1.0);
  auto f = [&](double t, const Vec& y) -> Vec { return mi * (h0 * y + lambda(t) * (coupling * y)); };
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    const Vec k1 = f(t, psi);
    const Vec k2 = f(t + 0.5 * dt, psi + 0.5 * dt * k1);
    const Vec k3 = f(t + 0.5 * dt, psi + 0.5 * dt * k2);
    const Vec k4 = f(t + dt, psi + dt * k3);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

/// exp(-i H t) for Hermitian H through its eigendecomposition.
inline Mat unitary(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Eigen::VectorXcd phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Entropy in bits from Schmidt coefficients of a pure bipartite state (rows = first factor).
inline double schmidt_entropy(const Mat& coeffs) {
  Eigen::JacobiSVD<Mat> svd(coeffs);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 1e-300) s -= p * std::log2(p);
  }
  return s;
}

/// (sum of Schmidt coefficients)^2 = trace norm of the partial transpose of a pure state.
inline double schmidt_trace_norm(const Mat& coeffs) {
  Eigen::JacobiSVD<Mat> svd(coeffs);
  const double s = svd.singularValues().sum();
  return s * s;
}

/// Dense Fock-space displacement D(alpha) = exp(alpha a^dag - alpha^* a) on `dim` levels.
inline Mat displacement(cplx alpha, int dim) {
  Mat gen = Mat::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    gen(n + 1, n) = alpha * std::sqrt(n + 1.0);
    gen(n, n + 1) = -std::conj(alpha) * std::sqrt(n + 1.0);
  }
  // gen is anti-Hermitian: gen = -i K with K Hermitian, so D = exp(-i K).
  const Mat k = cplx(0.0, 1.0) * gen;
  return unitary(k, 1.0);
}

/// W(x, p) = (1/pi) tr(rho D(alpha) P D(alpha)^dag), alpha = (x + i p)/sqrt 2, rho embedded into
/// a larger Fock space of `big` levels to suppress truncation of the displacement.
inline double displaced_parity(const Mat& rho, double x, double p, int big) {
  const int d = static_cast<int>(rho.rows());
  Mat r = Mat::Zero(big, big);
  r.topLeftCorner(d, d) = rho;
  const Mat dm = displacement(cplx(x, p) / std::sqrt(2.0), big);
  const Mat shifted = dm.adjoint() * r * dm;
  double w = 0.0;
  for (int n = 0; n < big; ++n) w += (n % 2 == 0 ? 1.0 : -1.0) * shifted(n, n).real();
  return w / M_PI;
}

}  // namespace oracle
