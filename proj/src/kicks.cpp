#include "dicke/kicks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "dicke/error.hpp"

namespace dicke {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<double, 3> kSupportA{-kPi / 2.0, 0.0, kPi / 2.0};
constexpr std::size_t kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool member(const std::array<double, 3>& set, double v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

cplx mean_phase(const std::array<double, 3>& set) {
  cplx s{0.0, 0.0};
  for (double v : set) s += std::polar(1.0, v);
  return s / 3.0;
}

}  // namespace

void KickProtocol::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("kick memory parameter eps must be > 0");
  if (member(kSupportA, eps)) throw ConfigError("eps must not coincide with a source-A angle");
  const auto b = support(KickSource::B);
  for (double v : b) {
    if (member(kSupportA, v)) throw ConfigError("source supports must be disjoint");
  }
}

std::array<double, 3> KickProtocol::support(KickSource source) const {
  if (source == KickSource::A) return kSupportA;
  return {-3.0 * kPi / 4.0, eps, kPi / 4.0};
}

double KickProtocol::anchor(KickSource source) const { return source == KickSource::A ? 0.0 : eps; }

double KickProtocol::probability(KickSource source) const {
  switch (mixing) {
    case MixingRule::always_a: return source == KickSource::A ? 1.0 : 0.0;
    case MixingRule::always_b: return source == KickSource::B ? 1.0 : 0.0;
    case MixingRule::fair_random: return 0.5;
  }
  return 0.0;
}

std::string to_string(MixingRule rule) {
  switch (rule) {
    case MixingRule::always_a: return "always_a";
    case MixingRule::always_b: return "always_b";
    case MixingRule::fair_random: return "mixed";
  }
  return "?";
}

MixingRule mixing_rule_from_string(const std::string& name) {
  if (name == "always_a" || name == "A") return MixingRule::always_a;
  if (name == "always_b" || name == "B") return MixingRule::always_b;
  if (name == "mixed" || name == "fair_random") return MixingRule::fair_random;
  throw ConfigError("unknown kick protocol '" + name + "' (expected always_a, always_b or mixed)");
}

double sample_next_angle(const KickProtocol& protocol, KickSource source, double theta_prev, KickRng& rng) {
  const auto set = protocol.support(source);
  if (!member(set, theta_prev)) return protocol.anchor(source);
  std::uniform_int_distribution<int> pick(0, 2);
  return set[static_cast<std::size_t>(pick(rng))];
}

namespace {

KickSource draw_source(const KickProtocol& protocol, KickRng& rng) {
  switch (protocol.mixing) {
    case MixingRule::always_a: return KickSource::A;
    case MixingRule::always_b: return KickSource::B;
    case MixingRule::fair_random: break;
  }
  std::uniform_int_distribution<int> coin(0, 1);
  return coin(rng) == 0 ? KickSource::A : KickSource::B;
}

// Per-K running sums of cos, sin and their second moments.
struct Moments {
  std::vector<double> c, s, cc, ss, cs;
  explicit Moments(std::size_t n) : c(n, 0.0), s(n, 0.0), cc(n, 0.0), ss(n, 0.0), cs(n, 0.0) {}
  void add(std::size_t k, cplx z) {
    c[k] += z.real();
    s[k] += z.imag();
    cc[k] += z.real() * z.real();
    ss[k] += z.imag() * z.imag();
    cs[k] += z.real() * z.imag();
  }
  void merge(const Moments& o) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] += o.c[k];
      s[k] += o.s[k];
      cc[k] += o.cc[k];
      ss[k] += o.ss[k];
      cs[k] += o.cs[k];
    }
  }
};

void run_block(const KickProtocol& protocol, std::size_t n_kicks, std::size_t first, std::size_t count,
               std::uint64_t seed, std::size_t block, KickEstimator estimator, Moments& out) {
  KickRng rng(splitmix64(seed ^ splitmix64(block + 0x51ED270B7A3C1F9DULL)));
  const auto mean_a = mean_phase(protocol.support(KickSource::A));
  const auto mean_b = mean_phase(protocol.support(KickSource::B));
  (void)first;
  for (std::size_t tr = 0; tr < count; ++tr) {
    // The initial angle only seeds the memory; coherence starts at 1.
    KickSource prev = draw_source(protocol, rng);
    double theta = protocol.anchor(prev);
    double phase = 0.0;
    cplx weight{1.0, 0.0};
    out.add(0, {1.0, 0.0});
    for (std::size_t k = 1; k <= n_kicks; ++k) {
      const KickSource src = draw_source(protocol, rng);
      if (estimator == KickEstimator::sampled) {
        theta = sample_next_angle(protocol, src, theta, rng);
        phase += theta;
        out.add(k, std::polar(1.0, phase));
      } else {
        if (src == prev) {
          weight *= src == KickSource::A ? mean_a : mean_b;
        } else {
          weight *= std::polar(1.0, protocol.anchor(src));
        }
        out.add(k, weight);
      }
      prev = src;
    }
  }
}

}  // namespace

DecayCurve coherence_decay(const KickProtocol& protocol, std::size_t n_kicks, std::size_t n_traj,
                           std::uint64_t seed, KickEstimator estimator, unsigned workers) {
  protocol.validate();
  if (n_kicks < 1 || n_traj < 1) throw ConfigError("coherence_decay needs n_kicks >= 1 and n_traj >= 1");
  const std::size_t n_blocks = (n_traj + kBlock - 1) / kBlock;
  std::vector<Moments> partial(n_blocks, Moments(n_kicks + 1));
  workers = std::max(1u, workers);
  auto work = [&](unsigned w) {
    for (std::size_t b = w; b < n_blocks; b += workers) {
      const std::size_t first = b * kBlock;
      const std::size_t count = std::min(kBlock, n_traj - first);
      run_block(protocol, n_kicks, first, count, seed, b, estimator, partial[b]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  Moments total(n_kicks + 1);
  for (const auto& p : partial) total.merge(p);

  DecayCurve curve;
  curve.protocol = protocol;
  curve.estimator = estimator;
  curve.n_traj = n_traj;
  curve.seed = seed;
  const double n = static_cast<double>(n_traj);
  for (std::size_t k = 0; k <= n_kicks; ++k) {
    const cplx m{total.c[k] / n, total.s[k] / n};
    const double mag = std::abs(m);
    // Variance of the trajectory values projected on the direction of the mean.
    const double vc = total.cc[k] / n - m.real() * m.real();
    const double vs = total.ss[k] / n - m.imag() * m.imag();
    const double cv = total.cs[k] / n - m.real() * m.imag();
    double var = 0.5 * (vc + vs);
    if (mag > 0.0) {
      const double ux = m.real() / mag;
      const double uy = m.imag() / mag;
      var = ux * ux * vc + uy * uy * vs + 2.0 * ux * uy * cv;
    }
    curve.mean.push_back(m);
    curve.coherence.push_back(k == 0 ? 1.0 : mag);
    curve.stderr_.push_back(n > 1.0 ? std::sqrt(std::max(0.0, var) / (n - 1.0)) : 0.0);
  }
  return curve;
}

std::array<std::array<cplx, 2>, 2> transfer_matrix(const KickProtocol& protocol, bool eps_to_zero) {
  KickProtocol p = protocol;
  if (eps_to_zero) p.eps = 0.0;
  const std::array<KickSource, 2> src{KickSource::A, KickSource::B};
  std::array<std::array<cplx, 2>, 2> m{};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t s = 0; s < 2; ++s) {
      const cplx factor = c == s ? mean_phase(p.support(src[c])) : std::polar(1.0, p.anchor(src[c]));
      m[c][s] = p.probability(src[c]) * factor;
    }
  }
  return m;
}

double transfer_matrix_rate(const KickProtocol& protocol, bool eps_to_zero) {
  const auto m = transfer_matrix(protocol, eps_to_zero);
  const cplx tr = m[0][0] + m[1][1];
  const cplx det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  return std::max(std::abs(0.5 * (tr + disc)), std::abs(0.5 * (tr - disc)));
}

RateFit fit_decay_rate(const DecayCurve& curve, std::size_t k_lo, std::size_t k_hi) {
  if (k_hi >= curve.coherence.size() || k_lo >= k_hi) throw ConfigError("fit_decay_rate: bad K range");
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double c = curve.coherence[k];
    if (!(c > 0.0)) throw NumericalError("fit_decay_rate: nonpositive coherence");
    const double sigma = curve.stderr_[k] > 0.0 ? curve.stderr_[k] / c : 1e-12;
    const double w = 1.0 / (sigma * sigma);
    const double x = static_cast<double>(k);
    const double y = std::log(c);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double den = sw * sxx - sx * sx;
  const double slope = (sw * sxy - sx * sy) / den;
  const double slope_err = std::sqrt(sw / den);
  return {std::exp(slope), std::exp(slope) * slope_err};
}

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.size() < 2) throw ConfigError("extrapolate_to_zero needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    mx += eps[i];
    my += values[i];
  }
  mx /= static_cast<double>(eps.size());
  my /= static_cast<double>(eps.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sxy += (eps[i] - mx) * (values[i] - my);
    sxx += (eps[i] - mx) * (eps[i] - mx);
  }
  return my - (sxy / sxx) * mx;
}

}  // namespace dicke
