#include "dicke/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dicke/error.hpp"

namespace dicke {

namespace {

Eigen::Map<const Eigen::MatrixXcd> amplitude_matrix(const PureState& psi) {
  // Row-major (k, n) storage viewed as a column-major boson_dim x spin_dim matrix.
  return {psi.amplitudes.data(), static_cast<Eigen::Index>(psi.basis.boson_dim()),
          static_cast<Eigen::Index>(psi.basis.spin_dim())};
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues();
}

double entropy_from_eigenvalues(const Eigen::VectorXd& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double v = p(i);
    if (v < -kEigenClip) {
      std::ostringstream os;
      os << "reduced state has eigenvalue " << v << " below -" << kEigenClip;
      throw NumericalError(os.str());
    }
    if (v <= 0.0) continue;
    s -= v * std::log2(v);
  }
  return std::max(0.0, s);
}

}  // namespace

ReducedState reduce(const PureState& psi, Subsystem keep) {
  const auto a = amplitude_matrix(psi);  // a(n, k) = psi(k, n)
  ReducedState out{keep, {}};
  if (keep == Subsystem::spin) {
    // rho_s(k, k') = sum_n psi(k, n) psi(k', n)^*
    out.rho = (a.adjoint() * a).transpose();
  } else {
    // rho_b(n, n') = sum_k psi(k, n) psi(k, n')^*
    out.rho = a * a.adjoint();
  }
  return out;
}

ReducedState reduce(const DensityMatrix& rho, Subsystem keep) {
  const auto ds = static_cast<Eigen::Index>(rho.basis.spin_dim());
  const auto db = static_cast<Eigen::Index>(rho.basis.boson_dim());
  ReducedState out{keep, {}};
  if (keep == Subsystem::spin) {
    out.rho = Eigen::MatrixXcd::Zero(ds, ds);
    for (Eigen::Index k = 0; k < ds; ++k)
      for (Eigen::Index kp = 0; kp < ds; ++kp) out.rho(k, kp) = rho.rho.block(k * db, kp * db, db, db).trace();
  } else {
    out.rho = Eigen::MatrixXcd::Zero(db, db);
    for (Eigen::Index k = 0; k < ds; ++k) out.rho += rho.rho.block(k * db, k * db, db, db);
  }
  return out;
}

double von_neumann_entropy(const ReducedState& rho) {
  return entropy_from_eigenvalues(hermitian_eigenvalues(rho.rho));
}

double entanglement_entropy(const PureState& psi) {
  const Subsystem smaller =
      psi.basis.spin_dim() <= psi.basis.boson_dim() ? Subsystem::spin : Subsystem::boson;
  return von_neumann_entropy(reduce(psi, smaller));
}

Eigen::MatrixXcd partial_transpose_spin(const DensityMatrix& rho) {
  const auto ds = static_cast<Eigen::Index>(rho.basis.spin_dim());
  const auto db = static_cast<Eigen::Index>(rho.basis.boson_dim());
  Eigen::MatrixXcd out(rho.rho.rows(), rho.rho.cols());
  // Block (k, k') of the result is block (k', k) of rho.
  for (Eigen::Index k = 0; k < ds; ++k)
    for (Eigen::Index kp = 0; kp < ds; ++kp) out.block(k * db, kp * db, db, db) = rho.rho.block(kp * db, k * db, db, db);
  return out;
}

Negativity negativity(const DensityMatrix& rho) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(partial_transpose_spin(rho));
  const double trace_norm = ev.cwiseAbs().sum();
  return {0.5 * (trace_norm - 1.0) > 0.0 ? 0.5 * (trace_norm - 1.0) : 0.0,
          trace_norm > 1.0 ? std::log2(trace_norm) : 0.0};
}

Negativity negativity(const PureState& psi) {
  // Schmidt coefficients straight from the coefficient matrix; square roots of tiny
  // reduced-state eigenvalues would amplify their round-off.
  const double sum = Eigen::BDCSVD<Eigen::MatrixXcd>(amplitude_matrix(psi)).singularValues().sum();
  const double trace_norm = sum * sum;
  return {std::max(0.0, 0.5 * (trace_norm - 1.0)), trace_norm > 1.0 ? std::log2(trace_norm) : 0.0};
}

cplx expectation(const BandedOperator& op, const PureState& psi) {
  const auto y = op.apply(psi.amplitudes);
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < y.size(); ++i) s += std::conj(psi.amplitudes[i]) * y[i];
  return s;
}

cplx expectation(const BandedOperator& op, const DensityMatrix& rho) {
  if (op.dim != static_cast<std::size_t>(rho.rho.rows())) throw ConfigError("expectation: dimension mismatch");
  // tr(rho O) = sum_i sum_b O[i][i+off] rho[i+off][i]
  cplx s{0.0, 0.0};
  for (std::size_t b = 0; b < op.bands.size(); ++b) {
    for (std::size_t i = 0; i < op.dim; ++i) {
      const double v = op.bands[b][i];
      if (v == 0.0) continue;
      const auto col = static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(i) + op.offsets[b]);
      s += v * rho.rho(col, static_cast<Eigen::Index>(i));
    }
  }
  return s;
}

namespace {

template <class State>
ScalarObservables scalars_impl(const State& s) {
  ScalarObservables o;
  o.s_bits = von_neumann_entropy(reduce(s, Subsystem::spin));
  o.jz = expectation(jz_operator(s.basis), s).real();
  o.photon_number = expectation(number_operator(s.basis), s).real();
  o.parity = expectation(parity_operator(s.basis), s).real();
  return o;
}

}  // namespace

ScalarObservables scalar_observables(const PureState& psi) {
  ScalarObservables o = scalars_impl(psi);
  o.s_bits = entanglement_entropy(psi);
  return o;
}

ScalarObservables scalar_observables(const DensityMatrix& rho) { return scalars_impl(rho); }

}  // namespace dicke
