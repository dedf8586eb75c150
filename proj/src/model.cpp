#include "dicke/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dicke/error.hpp"

namespace dicke {

void DickeParams::validate() const {
  if (n_qubits < 1) throw ConfigError("N must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be > 0");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
}

double DickeParams::critical_coupling() const { return 0.5 * std::sqrt(epsilon * omega); }

PulseSchedule::PulseSchedule(double lambda_max, double tau, PulseShape shape)
    : lambda_max_(lambda_max), tau_(tau), shape_(shape) {
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
    throw ConfigError("lambda_max must be finite and >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be finite and > 0");
}

PulseSchedule PulseSchedule::from_velocity(double lambda_max, double upsilon) {
  if (!(upsilon > 0.0) || !std::isfinite(upsilon)) throw ConfigError("upsilon must be > 0");
  if (!(lambda_max > 0.0)) throw ConfigError("from_velocity needs lambda_max > 0");
  return PulseSchedule(lambda_max, 2.0 * lambda_max / upsilon);
}

PulseSchedule PulseSchedule::from_log2_velocity(double lambda_max, double log2_upsilon) {
  return from_velocity(lambda_max, std::exp2(log2_upsilon));
}

double PulseSchedule::value(double t) const {
  if (!(t >= 0.0) || t > tau_) {
    std::ostringstream os;
    os << "pulse time " << t << " outside [0, " << tau_ << "]";
    throw ConfigError(os.str());
  }
  return value_or_zero(t);
}

double PulseSchedule::value_or_zero(double t) const {
  if (t <= 0.0 || t >= tau_) return 0.0;
  const double half = 0.5 * tau_;
  const double slope = lambda_max_ / half;
  // Evaluated symmetrically so that value(t) == value(tau - t) bit-for-bit.
  const double d = t <= half ? t : tau_ - t;
  return slope * d;
}

Basis::Basis(const DickeParams& params, std::size_t max_dimension)
    : n_qubits_(params.n_qubits), n_max_(params.n_max) {
  params.validate();
  const auto spin = static_cast<std::size_t>(n_qubits_) + 1;
  const auto boson = static_cast<std::size_t>(n_max_) + 1;
  if (boson > max_dimension / spin) {
    std::ostringstream os;
    os << "basis dimension (" << spin << " x " << boson << ") exceeds ceiling " << max_dimension;
    throw ResourceError(os.str());
  }
}

std::size_t Basis::index_m(double m, int n) const {
  const double k = m + j();
  const long kr = std::lround(k);
  if (std::abs(k - static_cast<double>(kr)) > 1e-9 || kr < 0 || kr > n_qubits_ || n < 0 ||
      n > n_max_) {
    throw ConfigError("basis label out of range");
  }
  return index(static_cast<int>(kr), n);
}

std::vector<double> Basis::m_values() const {
  std::vector<double> out(spin_dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(k) - j();
  return out;
}

std::vector<int> Basis::n_values() const {
  std::vector<int> out(boson_dim());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = static_cast<int>(n);
  return out;
}

Basis build_basis(const DickeParams& params, std::size_t max_dimension) {
  return Basis(params, max_dimension);
}

std::vector<cplx> BandedOperator::apply(const std::vector<cplx>& x) const {
  if (x.size() != dim) throw ConfigError("operator/vector dimension mismatch");
  std::vector<cplx> y(dim, cplx{0.0, 0.0});
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto off = offsets[b];
    const auto& band = bands[b];
    for (std::size_t i = 0; i < dim; ++i) {
      if (band[i] == 0.0) continue;
      y[i] += band[i] * x[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)];
    }
  }
  return y;
}

Eigen::MatrixXd BandedOperator::to_dense() const {
  if (dim > kDenseEigenCap) throw ResourceError("dense conversion above dimension cap");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    for (std::size_t i = 0; i < dim; ++i) {
      if (bands[b][i] == 0.0) continue;
      const auto col = static_cast<std::ptrdiff_t>(i) + offsets[b];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) += bands[b][i];
    }
  }
  return m;
}

BandedOperator BandedOperator::adjoint() const {
  BandedOperator out;
  out.dim = dim;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto off = offsets[b];
    std::vector<double> band(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      if (bands[b][i] == 0.0) continue;
      const auto col = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off);
      band[col] = bands[b][i];
    }
    out.offsets.push_back(-off);
    out.bands.push_back(std::move(band));
  }
  return out;
}

double BandedOperator::gershgorin_abs_bound() const {
  double best = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double s = 0.0;
    for (const auto& band : bands) s += std::abs(band[i]);
    best = std::max(best, s);
  }
  return best;
}

std::size_t BandedOperator::max_abs_offset() const {
  std::size_t best = 0;
  for (auto off : offsets) best = std::max<std::size_t>(best, static_cast<std::size_t>(std::abs(off)));
  return best;
}

namespace {

// <m|J_+|m-1> = <m-1|J_-|m> with m = k - j.
double j_plus_element(double j, int k) {
  const double m = k - j;
  return std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m - 1.0)));
}

BandedOperator diagonal_operator(std::vector<double> diag) {
  BandedOperator op;
  op.dim = diag.size();
  op.offsets = {0};
  op.bands.push_back(std::move(diag));
  return op;
}

}  // namespace

DickeHamiltonian::DickeHamiltonian(const DickeParams& params, const Basis& basis)
    : params_(params), basis_(basis) {
  params.validate();
  if (basis.n_qubits() != params.n_qubits || basis.n_max() != params.n_max) {
    throw ConfigError("basis does not match parameters");
  }
  const std::size_t dim = basis.dim();
  const auto bd = static_cast<std::ptrdiff_t>(basis.boson_dim());
  const int kmax = basis.n_qubits();
  const int nmax = basis.n_max();
  const double j = basis.j();
  const double g = 2.0 / std::sqrt(static_cast<double>(params.n_qubits));

  diag_.assign(dim, 0.0);
  offsets_ = {bd + 1, bd - 1, -(bd - 1), -(bd + 1)};
  for (auto& c : coupling_) c.assign(dim, 0.0);

  for (std::size_t i = 0; i < dim; ++i) {
    const int k = basis.k_of(i);
    const int n = basis.n_of(i);
    diag_[i] = params.epsilon * (k - j) + params.omega * n;
    // Row (k, n) couples to (k+-1, n+-1) through (1/2)(J_+ + J_-)(a + a^dag).
    const double jx_up = k < kmax ? 0.5 * j_plus_element(j, k + 1) : 0.0;  // <k|J_x|k+1>
    const double jx_dn = k > 0 ? 0.5 * j_plus_element(j, k) : 0.0;         // <k|J_x|k-1>
    const double b_up = n < nmax ? std::sqrt(n + 1.0) : 0.0;               // <n|a|n+1>
    const double b_dn = n > 0 ? std::sqrt(static_cast<double>(n)) : 0.0;   // <n|a^dag|n-1>
    coupling_[0][i] = g * jx_up * b_up;
    coupling_[1][i] = g * jx_up * b_dn;
    coupling_[2][i] = g * jx_dn * b_up;
    coupling_[3][i] = g * jx_dn * b_dn;
  }
}

BandedOperator DickeHamiltonian::at(double lambda) const {
  BandedOperator op;
  op.dim = diag_.size();
  op.offsets.push_back(0);
  op.bands.push_back(diag_);
  for (std::size_t b = 0; b < 4; ++b) {
    std::vector<double> band(coupling_[b]);
    for (auto& v : band) v *= lambda;
    op.offsets.push_back(offsets_[b]);
    op.bands.push_back(std::move(band));
  }
  return op;
}

Eigen::MatrixXd DickeHamiltonian::dense(double lambda) const { return at(lambda).to_dense(); }

std::pair<double, double> DickeHamiltonian::spectral_bounds(double lambda_max) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    double r = 0.0;
    for (const auto& c : coupling_) r += std::abs(c[i]);
    r *= std::abs(lambda_max);
    lo = std::min(lo, diag_[i] - r);
    hi = std::max(hi, diag_[i] + r);
  }
  return {lo, hi};
}

BandedOperator hamiltonian(const DickeParams& params, const Basis& basis, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("coupling lambda must be >= 0");
  return DickeHamiltonian(params, basis).at(lambda);
}

BandedOperator parity_operator(const Basis& basis) {
  std::vector<double> d(basis.dim());
  for (std::size_t i = 0; i < d.size(); ++i) {
    // m + j == k, an integer.
    d[i] = ((basis.n_of(i) + basis.k_of(i)) % 2 == 0) ? 1.0 : -1.0;
  }
  return diagonal_operator(std::move(d));
}

BandedOperator jz_operator(const Basis& basis) {
  std::vector<double> d(basis.dim());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = basis.m_of(i);
  return diagonal_operator(std::move(d));
}

BandedOperator number_operator(const Basis& basis) {
  std::vector<double> d(basis.dim());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = basis.n_of(i);
  return diagonal_operator(std::move(d));
}

BandedOperator jx_operator(const Basis& basis) {
  const std::size_t dim = basis.dim();
  const auto bd = static_cast<std::ptrdiff_t>(basis.boson_dim());
  BandedOperator op;
  op.dim = dim;
  op.offsets = {bd, -bd};
  op.bands.assign(2, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) {
    const int k = basis.k_of(i);
    if (k < basis.n_qubits()) op.bands[0][i] = 0.5 * j_plus_element(basis.j(), k + 1);
    if (k > 0) op.bands[1][i] = 0.5 * j_plus_element(basis.j(), k);
  }
  return op;
}

BandedOperator annihilation_operator(const Basis& basis) {
  BandedOperator op;
  op.dim = basis.dim();
  op.offsets = {1};
  op.bands.assign(1, std::vector<double>(op.dim, 0.0));
  for (std::size_t i = 0; i < op.dim; ++i) {
    const int n = basis.n_of(i);
    if (n < basis.n_max()) op.bands[0][i] = std::sqrt(n + 1.0);
  }
  return op;
}

BandedOperator creation_operator(const Basis& basis) { return annihilation_operator(basis).adjoint(); }

GroundState ground_state(const DickeParams& params, const Basis& basis, double lambda,
                         std::size_t dense_cap) {
  if (basis.dim() > dense_cap) {
    std::ostringstream os;
    os << "dimension " << basis.dim() << " exceeds dense eigensolver cap " << dense_cap
       << "; use an iterative solver";
    throw ResourceError(os.str());
  }
  // H conserves parity, so each sector is diagonalized separately. Near-degenerate
  // even/odd doublets above the critical coupling then cannot mix in the eigenvector.
  const Eigen::MatrixXd h = hamiltonian(params, basis, lambda).to_dense();
  const auto parity = parity_operator(basis).bands[0];
  std::array<std::vector<Eigen::Index>, 2> sector;
  for (std::size_t i = 0; i < parity.size(); ++i) {
    sector[parity[i] > 0.0 ? 0 : 1].push_back(static_cast<Eigen::Index>(i));
  }

  struct SectorSpectrum {
    Eigen::VectorXd values;
    Eigen::VectorXd ground;
  };
  auto solve = [&](const std::vector<Eigen::Index>& idx) {
    SectorSpectrum out;
    if (idx.empty()) return out;
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = h(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    if (es.info() != Eigen::Success) throw NumericalError("ground-state eigensolver failed");
    out.values = es.eigenvalues();
    out.ground = es.eigenvectors().col(0);
    return out;
  };
  const SectorSpectrum even = solve(sector[0]);
  const SectorSpectrum odd = solve(sector[1]);

  const bool even_lowest = odd.values.size() == 0 || even.values(0) <= odd.values(0);
  const SectorSpectrum& low = even_lowest ? even : odd;
  const SectorSpectrum& other = even_lowest ? odd : even;
  const auto& low_idx = even_lowest ? sector[0] : sector[1];

  GroundState gs;
  gs.energy = low.values(0);
  double next = std::numeric_limits<double>::infinity();
  if (low.values.size() > 1) next = low.values(1);
  if (other.values.size() > 0) next = std::min(next, other.values(0));
  gs.gap = std::isfinite(next) ? next - gs.energy : 0.0;

  Eigen::VectorXd v = low.ground;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
  v.normalize();
  gs.amplitudes.assign(basis.dim(), cplx{0.0, 0.0});
  for (Eigen::Index a = 0; a < v.size(); ++a) {
    gs.amplitudes[static_cast<std::size_t>(low_idx[static_cast<std::size_t>(a)])] = v(a);
  }
  return gs;
}

}  // namespace dicke
