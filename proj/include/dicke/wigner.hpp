#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/model.hpp"
#include "dicke/state.hpp"

namespace dicke {

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley convention.
/// Angular momenta are passed as doubles holding integers or half-integers.
/// Returns 0 when a selection rule fails; throws ConfigError for malformed labels.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);

/// Multipole coefficients rho_KQ = tr(rho T_KQ^dag), K = 0..2j, Q = -K..K.
class MultipoleSpectrum {
 public:
  explicit MultipoleSpectrum(double j = 0.0);

  double j() const { return j_; }
  int max_rank() const { return static_cast<int>(std::lround(2.0 * j_)); }
  cplx& at(int K, int Q) { return coeff_[offset(K, Q)]; }
  cplx at(int K, int Q) const { return coeff_[offset(K, Q)]; }
  std::size_t size() const { return coeff_.size(); }
  double sum_squares() const;

 private:
  std::size_t offset(int K, int Q) const;
  double j_;
  std::vector<cplx> coeff_;
};

/// Irreducible tensor operator T_KQ on the 2j+1 dimensional spin space, rows and
/// columns indexed by k = m + j. Built from J_+ powers and J_- commutators, with
/// tr(T_KQ^dag T_K'Q') = delta and T_00 = I / sqrt(2j+1).
Eigen::MatrixXcd tensor_operator(double j, int K, int Q);

MultipoleSpectrum spin_multipoles(const ReducedState& spin_state);

enum class FieldKind { boson_plane, spin_sphere };

/// Uniform axis: `count` nodes from lo to hi inclusive.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;

  double node(std::size_t i) const;
  double spacing() const;
};

struct PlaneGrid {
  Axis x{-6.0, 6.0, 201};
  Axis p{-6.0, 6.0, 201};
};

/// theta in [0, pi]; phi nodes span [0, 2 pi] with the last node a periodic copy of the first.
struct SphereGrid {
  std::size_t theta_count = 181;
  std::size_t phi_count = 361;

  Axis theta() const;
  Axis phi() const;
};

struct FieldProvenance {
  double t = 0.0;
  double upsilon = 0.0;
  int n_qubits = 0;
  double lambda = 0.0;
};

/// Sampled quasi-probability. values are row-major with the first axis (x or theta)
/// slowest.
struct WignerField {
  FieldKind kind = FieldKind::boson_plane;
  Axis first;
  Axis second;
  std::vector<double> values;
  FieldProvenance provenance;
  double max_imaginary_residue = 0.0;
  /// Fraction of photon-number mass the plane cannot represent (boson fields only).
  double mass_outside = 0.0;
  std::vector<std::string> warnings;

  double at(std::size_t i, std::size_t k) const { return values[i * second.count + k]; }
  /// Quadrature of W over the grid (area element dx dp or sin(theta) dtheta dphi).
  double integral() const;
  double min_value() const;
};

/// Agarwal spin Wigner function W(theta, phi) = c * sum rho_KQ Y_KQ, c = sqrt((2j+1)/(4 pi)),
/// normalized to unit integral over the sphere.
WignerField agarwal_wigner(const MultipoleSpectrum& spectrum, const SphereGrid& grid = {});

/// W(x, p) = (1/pi) sum_n (-1)^n <n| D(alpha)^dag rho D(alpha) |n>, alpha = (x + i p)/sqrt(2),
/// evaluated exactly for the truncated rho through the Laguerre recursion of Fock matrix elements.
WignerField boson_wigner(const ReducedState& boson_state, const PlaneGrid& grid = {});

/// Sum of max(-W, 0) times the area element.
double negativity_volume(const WignerField& field);

}  // namespace dicke
