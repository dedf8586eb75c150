#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/state.hpp"

namespace dicke {

struct IntegratorControl {
  /// Base step: h = min(base_step, base_step / upsilon).
  double base_step = 1e-2;
  /// When > 0, used as the step instead of the velocity rule.
  double fixed_step = 0.0;
  double min_step = 1e-9;
  /// Occupation of the two highest Fock levels that triggers a truncation error.
  double leakage_tolerance = 1e-6;
  bool check_leakage = true;
  /// Target truncation error of each Chebyshev exponential.
  double chebyshev_tolerance = 1e-16;
  bool renormalize_at_snapshots = true;
};

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t matvecs = 0;
  double step = 0.0;
  double max_norm_drift = 0.0;         // largest |‖psi‖ - 1| seen at a snapshot
  double cumulative_norm_drift = 0.0;  // sum of drifts removed by renormalization
  double max_leakage = 0.0;            // largest top-two-level occupation seen
};

struct Snapshot {
  double t = 0.0;
  double lambda = 0.0;
  PureState state;
};

struct Trajectory {
  DickeParams params;
  PulseSchedule schedule{1.0, 1.0};
  std::vector<Snapshot> snapshots;
  IntegratorStats stats;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

/// |m = -j, n = 0>, all qubits down and the boson in vacuum.
PureState initial_state(const Basis& basis);

/// |<a|b>|^2. Throws ConfigError on basis mismatch.
double fidelity(const PureState& a, const PureState& b);

/// `count` uniformly spaced times from 0 to tau inclusive.
std::vector<double> uniform_times(double tau, std::size_t count);

/// Step size chosen by the velocity rule (or the fixed override).
double step_for(const PulseSchedule& schedule, const IntegratorControl& ctrl);

/// Fourth-order commutator-free Magnus propagation of i d|psi>/dt = H(lambda(t))|psi>.
/// Each exponential is applied with a Chebyshev expansion over the banded
/// Hamiltonian. Snapshot times must be nondecreasing and >= state.t; times past
/// tau evolve freely at lambda = 0.
void propagate(const PureState& state, const DickeParams& params, const PulseSchedule& schedule,
               const std::vector<double>& snapshot_times, const IntegratorControl& ctrl,
               const SnapshotSink& sink, IntegratorStats* stats_out = nullptr);

/// Convenience overload that stores every snapshot.
Trajectory propagate(const PureState& state, const DickeParams& params,
                     const PulseSchedule& schedule, const std::vector<double>& snapshot_times,
                     const IntegratorControl& ctrl = {});

/// Occupation of the two highest Fock levels.
double top_level_occupation(const PureState& psi);

}  // namespace dicke
