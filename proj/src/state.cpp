#include "dicke/state.hpp"

#include <cmath>

#include "dicke/error.hpp"

namespace dicke {

double PureState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const auto d = static_cast<Eigen::Index>(psi.amplitudes.size());
  Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes.data(), d);
  return DensityMatrix{psi.basis, v * v.adjoint(), psi.t};
}

double DensityMatrix::trace_deviation() const { return std::abs(rho.trace() - cplx{1.0, 0.0}); }

double DensityMatrix::hermiticity_deviation() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("density-matrix eigensolver failed");
  return es.eigenvalues()(0);
}

}  // namespace dicke
