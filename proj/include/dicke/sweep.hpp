#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicke/integrate.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/model.hpp"

namespace dicke {

/// Ladder of boson truncations tried by auto_truncation().
struct TruncationPolicy {
  bool automatic = true;
  int fixed_n_max = 32;
  int start = 16;
  int stride = 8;
  int cap = 128;
  double fidelity_tolerance = 1e-8;
  double leakage_tolerance = 1e-6;
};

struct TruncationRung {
  int n_max = 0;
  double max_leakage = 0.0;
  /// Fidelity of this rung's final state with the next rung's (NaN for the last rung run).
  double fidelity_to_next = 0.0;
};

struct TruncationResult {
  int n_max = 0;
  std::vector<TruncationRung> ladder;
};

/// Smallest n_max on the ladder whose final state agrees with the next rung to
/// within the fidelity tolerance and whose top-two-level occupation stays below
/// the leakage tolerance for the whole cycle. Throws ResourceError past the cap.
TruncationResult auto_truncation(const DickeParams& params_template, const PulseSchedule& schedule,
                                 const TruncationPolicy& policy = {}, const IntegratorControl& ctrl = {});

struct SweepSpec {
  std::vector<int> n_qubits{7};
  std::vector<double> log2_upsilon{-5.0};
  double lambda_max = 1.0;
  double epsilon = 1.0;
  double omega = 1.0;
  /// Empty means closed-system points only.
  std::vector<NoiseParams> noise;
  std::size_t snapshots = 512;
  TruncationPolicy truncation;
  IntegratorControl control;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepPoint {
  int n_qubits = 7;
  double log2_upsilon = -5.0;
  std::optional<NoiseParams> noise;
};

struct SweepRecord {
  int n_qubits = 0;
  double log2_upsilon = 0.0;
  double upsilon = 0.0;
  double tau = 0.0;
  bool open = false;
  double kappa = 0.0;
  double n_bar = 0.0;
  int n_max = 0;
  double s_final = 0.0;
  double s_peak = 0.0;
  double t_peak = 0.0;
  double fidelity_final = 0.0;
  /// Open runs only.
  double negativity_peak = 0.0;
  double t_negativity_peak = 0.0;
  /// |S(spin) - S(boson)| at the entropy peak (closed runs only).
  double symmetry_residual = 0.0;
  double max_norm_drift = 0.0;
  double max_parity_deviation = 0.0;
  double max_leakage = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;
};

/// Propagates one full cycle. Closed points use the Magnus/Chebyshev propagator,
/// noisy points the master-equation propagator; open points take their truncation
/// from the closed-system ladder. Errors are rethrown with the point coordinates.
SweepRecord run_point(const SweepSpec& spec, const SweepPoint& point);

/// All (N, log2_upsilon, noise) points, statically partitioned over `workers`
/// threads. Failures are recorded on the point; the table is sorted by (N, upsilon, kappa, n_bar).
std::vector<SweepRecord> run_grid(const SweepSpec& spec, unsigned workers = 1);

/// Enhanced-region edges of one row (fixed N, closed system).
struct RegimeBoundary {
  int n_qubits = 0;
  double row_max = 0.0;
  double threshold = 0.0;
  bool found = false;
  double log2_upsilon_min = 0.0;
  double log2_upsilon_max = 0.0;
};

enum class ThresholdRule { relative_to_row_max, absolute_bits };

/// First and last upsilon with S_final above the threshold: `level * row max` for the
/// relative rule, `level` bits for the absolute rule.
std::vector<RegimeBoundary> regime_boundaries(const std::vector<SweepRecord>& records, ThresholdRule rule,
                                              double level);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of log(y) against log(x).
LineFit log_log_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dicke
