#include "dicke/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dicke/error.hpp"

namespace dicke {

namespace {

bool is_half_integer(double x) {
  const double twice = 2.0 * x;
  return std::abs(twice - std::round(twice)) < 1e-9;
}

long twice_of(double x) { return std::lround(2.0 * x); }

void check_pair(double j, double m) {
  if (!is_half_integer(j) || !is_half_integer(m) || j < -1e-12 || std::abs(m) > j + 1e-9 ||
      (twice_of(j) - twice_of(m)) % 2 != 0) {
    std::ostringstream os;
    os << "invalid angular momentum pair (j=" << j << ", m=" << m << ")";
    throw ConfigError(os.str());
  }
}

long double log_factorial(long n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

}  // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
  check_pair(j1, m1);
  check_pair(j2, m2);
  check_pair(J, M);
  const long tj1 = twice_of(j1), tm1 = twice_of(m1), tj2 = twice_of(j2), tm2 = twice_of(m2);
  const long tJ = twice_of(J), tM = twice_of(M);
  if (tm1 + tm2 != tM) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2 || (tj1 + tj2 + tJ) % 2 != 0) return 0.0;

  // Racah's closed form, all factorial arguments as integers.
  const long a = (tJ + tj1 - tj2) / 2;
  const long b = (tJ - tj1 + tj2) / 2;
  const long c = (tj1 + tj2 - tJ) / 2;
  const long s = (tj1 + tj2 + tJ) / 2 + 1;
  const long double log_pref =
      0.5L * (std::log(static_cast<long double>(tJ + 1)) + log_factorial(a) + log_factorial(b) +
              log_factorial(c) - log_factorial(s) + log_factorial((tJ + tM) / 2) +
              log_factorial((tJ - tM) / 2) + log_factorial((tj1 - tm1) / 2) +
              log_factorial((tj1 + tm1) / 2) + log_factorial((tj2 - tm2) / 2) +
              log_factorial((tj2 + tm2) / 2));
  const long e1 = c;                       // j1 + j2 - J - k
  const long e2 = (tj1 - tm1) / 2;         // j1 - m1 - k
  const long e3 = (tj2 + tm2) / 2;         // j2 + m2 - k
  const long e4 = (tJ - tj2 + tm1) / 2;    // J - j2 + m1 + k
  const long e5 = (tJ - tj1 - tm2) / 2;    // J - j1 - m2 + k
  const long kmin = std::max({0L, -e4, -e5});
  const long kmax = std::min({e1, e2, e3});
  long double sum = 0.0L;
  for (long k = kmin; k <= kmax; ++k) {
    const long double term = std::exp(log_pref - log_factorial(k) - log_factorial(e1 - k) -
                                      log_factorial(e2 - k) - log_factorial(e3 - k) -
                                      log_factorial(e4 + k) - log_factorial(e5 + k));
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

MultipoleSpectrum::MultipoleSpectrum(double j) : j_(j) {
  const int kmax = max_rank();
  coeff_.assign(static_cast<std::size_t>((kmax + 1) * (kmax + 1)), cplx{0.0, 0.0});
}

std::size_t MultipoleSpectrum::offset(int K, int Q) const {
  if (K < 0 || K > max_rank() || Q < -K || Q > K) throw ConfigError("multipole index out of range");
  return static_cast<std::size_t>(K * K + (Q + K));
}

double MultipoleSpectrum::sum_squares() const {
  double s = 0.0;
  for (const auto& c : coeff_) s += std::norm(c);
  return s;
}

Eigen::MatrixXcd tensor_operator(double j, int K, int Q) {
  const int dim = static_cast<int>(std::lround(2.0 * j)) + 1;
  if (!is_half_integer(j) || j < 0.0 || K < 0 || K > dim - 1 || Q < -K || Q > K) {
    throw ConfigError("tensor_operator: invalid (j, K, Q)");
  }
  // J_+ in the k = m + j ordering: <k+1|J_+|k> = sqrt(j(j+1) - m(m+1)).
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) {
    const double m = k - j;
    jp(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const Eigen::MatrixXcd jm = jp.adjoint();
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(dim, dim);
  for (int p = 0; p < K; ++p) t = jp * t;
  t /= std::sqrt(t.squaredNorm());
  if (K % 2 == 1) t = -t;
  // [J_-, T_KQ] = sqrt((K + Q)(K - Q + 1)) T_K,Q-1
  for (int q = K; q > Q; --q) {
    t = (jm * t - t * jm) / std::sqrt(static_cast<double>((K + q) * (K - q + 1)));
  }
  return t;
}

MultipoleSpectrum spin_multipoles(const ReducedState& spin_state) {
  if (spin_state.subsystem != Subsystem::spin) throw ConfigError("spin_multipoles needs a spin reduced state");
  const auto dim = spin_state.rho.rows();
  const double j = 0.5 * static_cast<double>(dim - 1);
  MultipoleSpectrum out(j);
  for (int K = 0; K <= out.max_rank(); ++K) {
    for (int Q = -K; Q <= K; ++Q) {
      const Eigen::MatrixXcd t = tensor_operator(j, K, Q);
      // tr(rho T^dag) = sum_ab rho_ab conj(T_ab)
      out.at(K, Q) = (spin_state.rho.array() * t.array().conjugate()).sum();
    }
  }
  return out;
}

double Axis::node(std::size_t i) const {
  if (count < 2) return lo;
  if (i + 1 == count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

double Axis::spacing() const { return count < 2 ? 0.0 : (hi - lo) / static_cast<double>(count - 1); }

Axis SphereGrid::theta() const { return Axis{0.0, std::numbers::pi, theta_count}; }
Axis SphereGrid::phi() const { return Axis{0.0, 2.0 * std::numbers::pi, phi_count}; }

namespace {

// Trapezoid weights along a closed axis (periodic duplicate endpoints share one weight).
double trapezoid_weight(const Axis& axis, std::size_t i) {
  const double w = axis.spacing();
  return (i == 0 || i + 1 == axis.count) ? 0.5 * w : w;
}

template <class F>
double quadrature(const WignerField& f, F&& integrand) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.first.count; ++i) {
    double area = trapezoid_weight(f.first, i);
    if (f.kind == FieldKind::spin_sphere) area *= std::sin(f.first.node(i));
    double row = 0.0;
    for (std::size_t k = 0; k < f.second.count; ++k) row += trapezoid_weight(f.second, k) * integrand(f.at(i, k));
    s += area * row;
  }
  return s;
}

}  // namespace

double WignerField::integral() const {
  return quadrature(*this, [](double w) { return w; });
}

double WignerField::min_value() const { return *std::min_element(values.begin(), values.end()); }

double negativity_volume(const WignerField& field) {
  return quadrature(field, [](double w) { return w < 0.0 ? -w : 0.0; });
}

WignerField agarwal_wigner(const MultipoleSpectrum& spectrum, const SphereGrid& grid) {
  if (grid.theta_count < 2 || grid.phi_count < 2) throw ConfigError("sphere grid needs >= 2 nodes per axis");
  WignerField f;
  f.kind = FieldKind::spin_sphere;
  f.first = grid.theta();
  f.second = grid.phi();
  f.values.assign(f.first.count * f.second.count, 0.0);
  const int kmax = spectrum.max_rank();
  const double c = std::sqrt((2.0 * spectrum.j() + 1.0) / (4.0 * std::numbers::pi));

  // e^{i Q phi} per phi node, Q = 0..kmax.
  std::vector<cplx> phase(f.second.count * static_cast<std::size_t>(kmax + 1));
  for (std::size_t k = 0; k < f.second.count; ++k) {
    const double phi = f.second.node(k);
    for (int q = 0; q <= kmax; ++q) phase[k * static_cast<std::size_t>(kmax + 1) + static_cast<std::size_t>(q)] = std::polar(1.0, q * phi);
  }
  std::vector<double> legendre(static_cast<std::size_t>((kmax + 1) * (kmax + 1)));
  for (std::size_t i = 0; i < f.first.count; ++i) {
    const double theta = f.first.node(i);
    for (int K = 0; K <= kmax; ++K)
      for (int q = 0; q <= K; ++q)
        legendre[static_cast<std::size_t>(K * (kmax + 1) + q)] =
            std::sph_legendre(static_cast<unsigned>(K), static_cast<unsigned>(q), theta);
    for (std::size_t k = 0; k < f.second.count; ++k) {
      const cplx* ph = &phase[k * static_cast<std::size_t>(kmax + 1)];
      cplx w{0.0, 0.0};
      for (int K = 0; K <= kmax; ++K) {
        for (int q = 0; q <= K; ++q) {
          const cplx y = legendre[static_cast<std::size_t>(K * (kmax + 1) + q)] * ph[q];
          w += spectrum.at(K, q) * y;
          // Y_{K,-q} = (-1)^q conj(Y_{K,q})
          if (q > 0) w += spectrum.at(K, -q) * ((q % 2 == 0 ? 1.0 : -1.0) * std::conj(y));
        }
      }
      w *= c;
      f.max_imaginary_residue = std::max(f.max_imaginary_residue, std::abs(w.imag()));
      f.values[i * f.second.count + k] = w.real();
    }
  }
  if (f.max_imaginary_residue > 1e-10) {
    std::ostringstream os;
    os << "spin Wigner imaginary residue " << f.max_imaginary_residue << " (non-Hermitian input?)";
    f.warnings.push_back(os.str());
  }
  return f;
}

WignerField boson_wigner(const ReducedState& boson_state, const PlaneGrid& grid) {
  if (boson_state.subsystem != Subsystem::boson) throw ConfigError("boson_wigner needs a boson reduced state");
  const Eigen::MatrixXcd& rho = boson_state.rho;
  const auto dim = static_cast<std::size_t>(rho.rows());
  WignerField f;
  f.kind = FieldKind::boson_plane;
  f.first = grid.x;
  f.second = grid.p;
  f.values.assign(f.first.count * f.second.count, 0.0);

  // Fock levels whose classical radius sqrt(2n + 1) leaves the plotted square.
  const double reach = std::min({std::abs(grid.x.lo), std::abs(grid.x.hi), std::abs(grid.p.lo), std::abs(grid.p.hi)});
  for (std::size_t n = 0; n < dim; ++n) {
    if (std::sqrt(2.0 * static_cast<double>(n) + 1.0) > reach) f.mass_outside += rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).real();
  }
  if (f.mass_outside > 1e-3) {
    std::ostringstream os;
    os << "photon-number mass outside the plane grid: " << f.mass_outside;
    f.warnings.push_back(os.str());
  }

  std::vector<double> sq(dim + 1);
  for (std::size_t n = 0; n <= dim; ++n) sq[n] = std::sqrt(static_cast<double>(n));
  std::vector<cplx> wl(dim);
  for (std::size_t i = 0; i < f.first.count; ++i) {
    const double x = f.first.node(i);
    for (std::size_t k = 0; k < f.second.count; ++k) {
      const double p = f.second.node(k);
      const cplx a{x / std::numbers::sqrt2, p / std::numbers::sqrt2};
      const cplx a2 = 2.0 * a;
      const cplx a2c = std::conj(a2);
      // wl[n] holds the Wigner function of the Fock dyad for the current row m.
      wl[0] = std::exp(-2.0 * std::norm(a)) / std::numbers::pi;
      double w = rho(0, 0).real() * wl[0].real();
      for (std::size_t n = 1; n < dim; ++n) {
        wl[n] = a2 * wl[n - 1] / sq[n];
        w += 2.0 * (rho(0, static_cast<Eigen::Index>(n)) * wl[n]).real();
      }
      for (std::size_t m = 1; m < dim; ++m) {
        cplx temp = wl[m];
        wl[m] = (a2c * temp - sq[m] * wl[m - 1]) / sq[m];
        w += (rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) * wl[m]).real();
        for (std::size_t n = m + 1; n < dim; ++n) {
          const cplx next = (a2 * wl[n - 1] - sq[m] * temp) / sq[n];
          temp = wl[n];
          wl[n] = next;
          w += 2.0 * (rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) * wl[n]).real();
        }
      }
      f.values[i * f.second.count + k] = w;
    }
  }
  return f;
}

}  // namespace dicke
