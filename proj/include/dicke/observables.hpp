#pragma once

#include "dicke/model.hpp"
#include "dicke/state.hpp"

namespace dicke {

/// Eigenvalues in [-kEigenClip, 0) are treated as zero before taking logarithms.
inline constexpr double kEigenClip = 1e-8;

ReducedState reduce(const PureState& psi, Subsystem keep);
ReducedState reduce(const DensityMatrix& rho, Subsystem keep);

/// Von Neumann entropy in bits. Throws NumericalError for eigenvalues below -kEigenClip.
double von_neumann_entropy(const ReducedState& rho);

/// Entanglement entropy of a pure global state, computed from the smaller factor.
double entanglement_entropy(const PureState& psi);

struct Negativity {
  double negativity = 0.0;      // (‖rho^T_spin‖_1 - 1) / 2
  double log_negativity = 0.0;  // log2 ‖rho^T_spin‖_1
};

/// Partial transpose on the spin factor followed by the trace norm.
Eigen::MatrixXcd partial_transpose_spin(const DensityMatrix& rho);
Negativity negativity(const DensityMatrix& rho);
/// Pure-state shortcut: trace norm of the partial transpose is (sum of Schmidt coefficients)^2.
Negativity negativity(const PureState& psi);

cplx expectation(const BandedOperator& op, const PureState& psi);
cplx expectation(const BandedOperator& op, const DensityMatrix& rho);

/// Commonly tabulated scalar observables.
struct ScalarObservables {
  double s_bits = 0.0;
  double jz = 0.0;
  double photon_number = 0.0;
  double parity = 0.0;
};

ScalarObservables scalar_observables(const PureState& psi);
ScalarObservables scalar_observables(const DensityMatrix& rho);

}  // namespace dicke
