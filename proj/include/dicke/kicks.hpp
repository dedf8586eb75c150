#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dicke/model.hpp"

namespace dicke {

enum class KickSource { A, B };

/// Which source fires at each kick.
enum class MixingRule { always_a, always_b, fair_random };

/// Correlated discrete phase kicks from two sources. Source A draws uniformly from
/// {-pi/2, 0, pi/2} when the previous angle lies in that set and returns 0 otherwise;
/// source B draws from {-3pi/4, eps, pi/4} under the same rule and returns eps otherwise.
struct KickProtocol {
  double eps = 1e-4;
  MixingRule mixing = MixingRule::fair_random;

  void validate() const;
  std::array<double, 3> support(KickSource source) const;
  /// Angle emitted by the "otherwise" branch: 0 for A, eps for B.
  double anchor(KickSource source) const;
  double probability(KickSource source) const;
};

std::string to_string(MixingRule rule);
MixingRule mixing_rule_from_string(const std::string& name);

using KickRng = std::mt19937_64;

double sample_next_angle(const KickProtocol& protocol, KickSource source, double theta_prev, KickRng& rng);

/// Monte Carlo estimator. `sampled` draws every angle; `conditional` draws only the
/// source sequence and averages e^{i theta} analytically over each uniform draw.
enum class KickEstimator { sampled, conditional };

struct DecayCurve {
  KickProtocol protocol;
  KickEstimator estimator = KickEstimator::sampled;
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  /// Index K = 0..n_kicks: |mean exp(i sum_{k<=K} theta_k)| and its standard error.
  std::vector<double> coherence;
  std::vector<double> stderr_;
  std::vector<cplx> mean;
};

/// Trajectories are split into fixed blocks seeded from (seed, block index), so the
/// result does not depend on `workers`.
DecayCurve coherence_decay(const KickProtocol& protocol, std::size_t n_kicks, std::size_t n_traj,
                           std::uint64_t seed, KickEstimator estimator = KickEstimator::sampled,
                           unsigned workers = 1);

/// 2x2 matrix M[c][s] = P(source c) * E[e^{i theta} | current source c, previous angle from s].
std::array<std::array<cplx, 2>, 2> transfer_matrix(const KickProtocol& protocol, bool eps_to_zero = false);
/// Modulus of the dominant eigenvalue of transfer_matrix().
double transfer_matrix_rate(const KickProtocol& protocol, bool eps_to_zero = false);

struct RateFit {
  double rate = 0.0;
  double stderr_ = 0.0;
};

/// exp of the weighted least-squares slope of log(coherence) over K in [k_lo, k_hi].
RateFit fit_decay_rate(const DecayCurve& curve, std::size_t k_lo, std::size_t k_hi);

/// Linear extrapolation of values measured at several eps to eps = 0.
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values);

}  // namespace dicke
