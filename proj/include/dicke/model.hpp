#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace dicke {

using cplx = std::complex<double>;

/// Physical parameters of the single-mode resonant Dicke model.
struct DickeParams {
  int n_qubits = 7;
  double epsilon = 1.0;
  double omega = 1.0;
  int n_max = 32;

  void validate() const;
  /// Static critical coupling sqrt(epsilon*omega)/2 of the thermodynamic limit.
  double critical_coupling() const;
};

enum class PulseShape { triangular };

/// Triangular up-and-down coupling profile lambda(t) on [0, tau].
class PulseSchedule {
 public:
  PulseSchedule(double lambda_max, double tau, PulseShape shape = PulseShape::triangular);

  /// Schedule with ramp slope |dlambda/dt| = upsilon, so tau = 2*lambda_max/upsilon.
  static PulseSchedule from_velocity(double lambda_max, double upsilon);
  static PulseSchedule from_log2_velocity(double lambda_max, double log2_upsilon);

  double lambda_max() const { return lambda_max_; }
  double tau() const { return tau_; }
  double upsilon() const { return 2.0 * lambda_max_ / tau_; }
  PulseShape shape() const { return shape_; }

  /// Coupling at time t. Throws ConfigError outside [0, tau].
  double value(double t) const;
  /// Same as value() but clamps t past tau to zero coupling (free evolution after the pulse).
  double value_or_zero(double t) const;

 private:
  double lambda_max_;
  double tau_;
  PulseShape shape_;
};

/// Default ceiling on the product-basis dimension.
inline constexpr std::size_t kMaxBasisDimension = std::size_t{1} << 22;

/// Collective basis |j, m> (x) |n>, m-major / n-minor.
/// The spin label is stored as k = m + j in [0, N].
class Basis {
 public:
  explicit Basis(const DickeParams& params, std::size_t max_dimension = kMaxBasisDimension);

  int n_qubits() const { return n_qubits_; }
  int n_max() const { return n_max_; }
  double j() const { return 0.5 * n_qubits_; }
  std::size_t spin_dim() const { return static_cast<std::size_t>(n_qubits_) + 1; }
  std::size_t boson_dim() const { return static_cast<std::size_t>(n_max_) + 1; }
  std::size_t dim() const { return spin_dim() * boson_dim(); }

  std::size_t index(int k, int n) const { return static_cast<std::size_t>(k) * boson_dim() + n; }
  /// Flat index from the magnetic quantum number m in {-j, ..., j}.
  std::size_t index_m(double m, int n) const;
  int k_of(std::size_t i) const { return static_cast<int>(i / boson_dim()); }
  int n_of(std::size_t i) const { return static_cast<int>(i % boson_dim()); }
  double m_of(std::size_t i) const { return k_of(i) - j(); }

  std::vector<double> m_values() const;
  std::vector<int> n_values() const;

  bool operator==(const Basis& o) const { return n_qubits_ == o.n_qubits_ && n_max_ == o.n_max_; }
  bool operator!=(const Basis& o) const { return !(*this == o); }

 private:
  int n_qubits_;
  int n_max_;
};

Basis build_basis(const DickeParams& params, std::size_t max_dimension = kMaxBasisDimension);

/// Real banded operator in diagonal (DIA) layout: y[i] = sum_b band[b][i] * x[i + offset[b]].
/// Band entries whose partner index falls outside the logical range are zero.
struct BandedOperator {
  std::size_t dim = 0;
  std::vector<std::ptrdiff_t> offsets;
  std::vector<std::vector<double>> bands;

  std::vector<cplx> apply(const std::vector<cplx>& x) const;
  Eigen::MatrixXd to_dense() const;
  BandedOperator adjoint() const;
  /// Largest Gershgorin radius bound, max_i sum_b |band[b][i]|.
  double gershgorin_abs_bound() const;
  std::size_t max_abs_offset() const;
};

/// H(lambda) = epsilon*J_z + omega*a^dag a + lambda * (2/sqrt(N)) J_x (a + a^dag).
/// Stored as the lambda-independent diagonal plus four unit-lambda coupling bands.
class DickeHamiltonian {
 public:
  DickeHamiltonian(const DickeParams& params, const Basis& basis);

  const Basis& basis() const { return basis_; }
  const DickeParams& params() const { return params_; }

  const std::vector<double>& diagonal() const { return diag_; }
  const std::array<std::vector<double>, 4>& coupling_bands() const { return coupling_; }
  const std::array<std::ptrdiff_t, 4>& coupling_offsets() const { return offsets_; }

  BandedOperator at(double lambda) const;
  Eigen::MatrixXd dense(double lambda) const;
  /// Bounds [lo, hi] on the spectrum of H(lambda') for all 0 <= lambda' <= lambda_max.
  std::pair<double, double> spectral_bounds(double lambda_max) const;

 private:
  DickeParams params_;
  Basis basis_;
  std::vector<double> diag_;
  std::array<std::ptrdiff_t, 4> offsets_{};
  std::array<std::vector<double>, 4> coupling_;
};

BandedOperator hamiltonian(const DickeParams& params, const Basis& basis, double lambda);

/// Diagonal Z2 parity (-1)^(n + m + j).
BandedOperator parity_operator(const Basis& basis);
BandedOperator jz_operator(const Basis& basis);
BandedOperator jx_operator(const Basis& basis);
BandedOperator number_operator(const Basis& basis);
BandedOperator annihilation_operator(const Basis& basis);
BandedOperator creation_operator(const Basis& basis);

struct GroundState {
  double energy = 0.0;
  double gap = 0.0;
  std::vector<cplx> amplitudes;
};

inline constexpr std::size_t kDenseEigenCap = 4096;

/// Lowest eigenpair of H(lambda) by dense diagonalization. The eigenvector's
/// largest-magnitude amplitude is made real positive.
GroundState ground_state(const DickeParams& params, const Basis& basis, double lambda,
                         std::size_t dense_cap = kDenseEigenCap);

}  // namespace dicke
