#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dicke/model.hpp"

namespace dicke {

/// Amplitudes over the collective product basis at time t.
struct PureState {
  Basis basis;
  std::vector<cplx> amplitudes;
  double t = 0.0;

  double norm() const;
};

/// Density operator on the full product space.
struct DensityMatrix {
  Basis basis;
  Eigen::MatrixXcd rho;
  double t = 0.0;

  static DensityMatrix from_pure(const PureState& psi);
  double trace_deviation() const;
  double hermiticity_deviation() const;
  double min_eigenvalue() const;
};

enum class Subsystem { spin, boson };

struct ReducedState {
  Subsystem subsystem = Subsystem::spin;
  Eigen::MatrixXcd rho;
};

}  // namespace dicke
