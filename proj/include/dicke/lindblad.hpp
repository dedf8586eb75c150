#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dicke/integrate.hpp"
#include "dicke/model.hpp"
#include "dicke/state.hpp"

namespace dicke {

/// Cavity damping rate kappa and thermal occupation n_bar of the boson bath.
struct NoiseParams {
  double kappa = 0.0;
  double n_bar = 0.0;

  void validate() const;
};

/// -i[H, rho] + 2 kappa (n_bar + 1) L(rho; a) + 2 kappa n_bar L(rho; a^dag),
/// with L(rho; O) = O rho O^dag - {O^dag O, rho}/2. Dense reference evaluation.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const BandedOperator& hamiltonian,
                              const Basis& basis, const NoiseParams& noise);

inline constexpr std::size_t kLindbladDimensionCap = 1024;

struct OpenControl {
  IntegratorControl base;
  /// Abort when the smallest eigenvalue of rho drops below -positivity_tolerance.
  double positivity_tolerance = 1e-6;
  bool check_positivity = true;
  std::size_t max_dimension = kLindbladDimensionCap;
  /// Largest |s| * ‖L‖ bound handled by one Taylor series before substepping.
  double taylor_radius = 2.0;
};

struct OpenStats {
  std::size_t steps = 0;
  std::size_t liouvillian_applications = 0;
  double step = 0.0;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_leakage = 0.0;
};

struct OpenSnapshot {
  double t = 0.0;
  double lambda = 0.0;
  DensityMatrix rho;
};

struct OpenTrajectory {
  DickeParams params;
  PulseSchedule schedule{1.0, 1.0};
  NoiseParams noise;
  std::vector<OpenSnapshot> snapshots;
  OpenStats stats;
};

using OpenSnapshotSink = std::function<void(const OpenSnapshot&)>;

/// Fourth-order commutator-free Magnus stepping of the master equation; each
/// frozen-generator exponential is a Taylor series of the Liouvillian applied
/// to rho, substepped so the series argument stays within taylor_radius.
void propagate_open(const DensityMatrix& rho0, const DickeParams& params,
                    const PulseSchedule& schedule, const NoiseParams& noise,
                    const std::vector<double>& snapshot_times, const OpenControl& ctrl,
                    const OpenSnapshotSink& sink, OpenStats* stats_out = nullptr);

OpenTrajectory propagate_open(const DensityMatrix& rho0, const DickeParams& params,
                              const PulseSchedule& schedule, const NoiseParams& noise,
                              const std::vector<double>& snapshot_times,
                              const OpenControl& ctrl = {});

/// Fock-space occupation of the two highest levels, tr(rho P_top).
double top_level_occupation(const DensityMatrix& rho);

}  // namespace dicke
