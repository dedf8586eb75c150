#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicke/integrate.hpp"
#include "dicke/kicks.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/model.hpp"
#include "dicke/sweep.hpp"
#include "dicke/wigner.hpp"

namespace dicke {

struct ModelSection {
  int n_qubits = 7;
  double epsilon = 1.0;
  double omega = 1.0;
  /// nullopt selects the truncation ladder.
  std::optional<int> n_max;
};

/// Exactly one of tau / log2_upsilon is set after loading.
struct PulseSection {
  double lambda_max = 1.0;
  std::optional<double> tau;
  std::optional<double> log2_upsilon;

  PulseSchedule schedule() const;
};

struct SolverSection {
  std::size_t snapshots = 257;
  IntegratorControl control;
  TruncationPolicy truncation;
  double positivity_tolerance = 1e-6;
};

struct OutputSection {
  std::optional<std::string> directory;
};

struct SweepSection {
  std::vector<int> n_qubits;
  std::vector<double> log2_upsilon;
  std::vector<NoiseParams> noise;
};

struct WignerSection {
  std::vector<double> times;
  PlaneGrid plane;
  SphereGrid sphere;
};

struct KicksSection {
  KickProtocol protocol;
  std::size_t n_kicks = 30;
  std::size_t n_traj = 1000000;
  KickEstimator estimator = KickEstimator::sampled;
};

struct GsSection {
  std::vector<double> lambdas;
};

/// Declarative run description. Parsing is strict: unknown keys and wrong types
/// are ConfigErrors naming the offending key path.
struct RunConfig {
  ModelSection model;
  PulseSection pulse;
  SolverSection solver;
  std::optional<NoiseParams> noise;
  OutputSection output;
  std::uint64_t seed = 0;
  SweepSection sweep;
  WignerSection wigner;
  KicksSection kicks;
  GsSection gs;

  DickeParams params(int n_max) const;
};

/// `source` names the document in diagnostics (usually the file path).
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical JSON form with every default filled in; stable across runs. The output
/// section is left out because it does not affect results.
std::string canonical_json(const RunConfig& config);
/// FNV-1a 64 of canonical_json(), as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace dicke
