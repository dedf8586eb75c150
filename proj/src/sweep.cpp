#include "dicke/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

#include "dicke/error.hpp"
#include "dicke/observables.hpp"

namespace dicke {

namespace {

struct ClosedCycle {
  SweepRecord record;
  PureState final_state;
};

double parity_of(const PureState& psi) {
  double p = 0.0;
  for (std::size_t i = 0; i < psi.amplitudes.size(); ++i) {
    const int sign = (psi.basis.k_of(i) + psi.basis.n_of(i)) % 2 == 0 ? 1 : -1;
    p += sign * std::norm(psi.amplitudes[i]);
  }
  return p / std::max(psi.norm() * psi.norm(), std::numeric_limits<double>::min());
}

ClosedCycle closed_cycle(const DickeParams& params, const PulseSchedule& schedule, std::size_t snapshots,
                         IntegratorControl ctrl) {
  ctrl.check_leakage = false;
  const Basis basis(params);
  const PureState psi0 = initial_state(basis);
  ClosedCycle out{SweepRecord{}, psi0};
  SweepRecord& r = out.record;
  PureState peak_state = psi0;
  r.s_peak = -1.0;
  auto sink = [&](const Snapshot& snap) {
    const double s = entanglement_entropy(snap.state);
    if (s > r.s_peak) {
      r.s_peak = s;
      r.t_peak = snap.t;
      peak_state = snap.state;
    }
    r.max_parity_deviation = std::max(r.max_parity_deviation, std::abs(parity_of(snap.state) - 1.0));
    r.max_leakage = std::max(r.max_leakage, top_level_occupation(snap.state));
    out.final_state = snap.state;
  };
  IntegratorStats stats;
  propagate(psi0, params, schedule, uniform_times(schedule.tau(), std::max<std::size_t>(snapshots, 2)), ctrl, sink,
            &stats);
  r.n_max = params.n_max;
  r.s_final = entanglement_entropy(out.final_state);
  r.fidelity_final = fidelity(out.final_state, psi0);
  r.max_norm_drift = stats.max_norm_drift;
  r.symmetry_residual = std::abs(von_neumann_entropy(reduce(peak_state, Subsystem::spin)) -
                                 von_neumann_entropy(reduce(peak_state, Subsystem::boson)));
  return out;
}

PureState embed(const PureState& small, const Basis& big) {
  PureState out{big, std::vector<cplx>(big.dim(), cplx{0.0, 0.0}), small.t};
  for (std::size_t i = 0; i < small.amplitudes.size(); ++i) {
    out.amplitudes[big.index(small.basis.k_of(i), small.basis.n_of(i))] = small.amplitudes[i];
  }
  return out;
}

// Runs the ladder and returns the accepted rung together with its cycle summary.
std::pair<TruncationResult, ClosedCycle> ladder_search(const DickeParams& templ, const PulseSchedule& schedule,
                                                       const TruncationPolicy& policy, const IntegratorControl& ctrl,
                                                       std::size_t snapshots) {
  if (policy.start < 1 || policy.stride < 1 || policy.cap < policy.start) {
    throw ConfigError("truncation ladder needs start >= 1, stride >= 1 and cap >= start");
  }
  TruncationResult result;
  DickeParams p = templ;
  p.n_max = policy.start;
  ClosedCycle prev = closed_cycle(p, schedule, snapshots, ctrl);
  result.ladder.push_back({p.n_max, prev.record.max_leakage, std::numeric_limits<double>::quiet_NaN()});
  if (schedule.lambda_max() == 0.0) {
    // The bare Hamiltonian conserves photon number, so the vacuum never leaves n = 0.
    result.n_max = p.n_max;
    return {result, prev};
  }
  while (true) {
    if (p.n_max + policy.stride > policy.cap) {
      std::ostringstream os;
      os << "auto truncation exceeded cap n_max=" << policy.cap << " (N=" << templ.n_qubits
         << ", upsilon=" << schedule.upsilon() << "); ladder:";
      for (const auto& rung : result.ladder) {
        os << " [n_max=" << rung.n_max << " leakage=" << rung.max_leakage << " fidelity_to_next=" << rung.fidelity_to_next
           << "]";
      }
      throw ResourceError(os.str());
    }
    p.n_max += policy.stride;
    ClosedCycle next = closed_cycle(p, schedule, snapshots, ctrl);
    const double f = fidelity(embed(prev.final_state, next.final_state.basis), next.final_state);
    result.ladder.back().fidelity_to_next = f;
    result.ladder.push_back({p.n_max, next.record.max_leakage, std::numeric_limits<double>::quiet_NaN()});
    if (f > 1.0 - policy.fidelity_tolerance && prev.record.max_leakage < policy.leakage_tolerance) {
      result.n_max = prev.record.n_max;
      return {result, prev};
    }
    prev = std::move(next);
  }
}

std::string describe(const SweepPoint& pt) {
  std::ostringstream os;
  os << "N=" << pt.n_qubits << ", log2_upsilon=" << pt.log2_upsilon;
  if (pt.noise) os << ", kappa=" << pt.noise->kappa << ", n_bar=" << pt.noise->n_bar;
  return os.str();
}

template <class E>
[[noreturn]] void rethrow_with(const E& e, const std::string& where) {
  throw E(std::string(e.what()) + " [" + where + "]");
}

SweepRecord open_cycle(const DickeParams& params, const PulseSchedule& schedule, const NoiseParams& noise,
                       std::size_t snapshots, const IntegratorControl& base) {
  OpenControl ctrl;
  ctrl.base = base;
  ctrl.base.check_leakage = false;
  const Basis basis(params);
  const DensityMatrix rho0 = DensityMatrix::from_pure(initial_state(basis));
  SweepRecord r;
  r.s_peak = -1.0;
  DensityMatrix last = rho0;
  auto sink = [&](const OpenSnapshot& snap) {
    const double s = von_neumann_entropy(reduce(snap.rho, Subsystem::spin));
    if (s > r.s_peak) {
      r.s_peak = s;
      r.t_peak = snap.t;
    }
    const Negativity neg = negativity(snap.rho);
    if (neg.negativity > r.negativity_peak) {
      r.negativity_peak = neg.negativity;
      r.t_negativity_peak = snap.t;
    }
    r.max_leakage = std::max(r.max_leakage, top_level_occupation(snap.rho));
    last = snap.rho;
  };
  OpenStats stats;
  propagate_open(rho0, params, schedule, noise, uniform_times(schedule.tau(), std::max<std::size_t>(snapshots, 2)),
                 ctrl, sink, &stats);
  r.n_max = params.n_max;
  r.s_final = von_neumann_entropy(reduce(last, Subsystem::spin));
  r.fidelity_final = last.rho(0, 0).real();
  r.max_norm_drift = stats.max_trace_drift;
  return r;
}

}  // namespace

TruncationResult auto_truncation(const DickeParams& params_template, const PulseSchedule& schedule,
                                 const TruncationPolicy& policy, const IntegratorControl& ctrl) {
  return ladder_search(params_template, schedule, policy, ctrl, 64).first;
}

void SweepSpec::validate() const {
  if (n_qubits.empty() || log2_upsilon.empty()) throw ConfigError("sweep axes must be nonempty");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw ConfigError("sweep lambda_max must be > 0");
  for (int n : n_qubits) {
    DickeParams p{n, epsilon, omega, truncation.automatic ? truncation.start : truncation.fixed_n_max};
    p.validate();
  }
  for (double u : log2_upsilon) {
    if (!std::isfinite(u)) throw ConfigError("log2_upsilon values must be finite");
  }
  for (const auto& nz : noise) nz.validate();
  if (snapshots < 2) throw ConfigError("sweep needs at least 2 snapshots");
}

SweepRecord run_point(const SweepSpec& spec, const SweepPoint& point) {
  const auto start = std::chrono::steady_clock::now();
  const std::string where = describe(point);
  SweepRecord r;
  try {
    const PulseSchedule schedule = PulseSchedule::from_log2_velocity(spec.lambda_max, point.log2_upsilon);
    DickeParams params{point.n_qubits, spec.epsilon, spec.omega, spec.truncation.fixed_n_max};
    const IntegratorControl& ctrl = spec.control;
    const bool open = point.noise.has_value();
    if (spec.truncation.automatic) {
      auto [trunc, cycle] = ladder_search(params, schedule, spec.truncation, ctrl, open ? 64 : spec.snapshots);
      params.n_max = trunc.n_max;
      if (!open) r = cycle.record;
    }
    if (open) {
      r = open_cycle(params, schedule, *point.noise, spec.snapshots, ctrl);
    } else if (!spec.truncation.automatic) {
      r = closed_cycle(params, schedule, spec.snapshots, ctrl).record;
    }
    r.open = open;
    if (open) {
      r.kappa = point.noise->kappa;
      r.n_bar = point.noise->n_bar;
    }
    r.n_qubits = point.n_qubits;
    r.log2_upsilon = point.log2_upsilon;
    r.upsilon = schedule.upsilon();
    r.tau = schedule.tau();
    r.converged = r.max_leakage < spec.truncation.leakage_tolerance;
  } catch (const ConfigError& e) {
    rethrow_with(e, where);
  } catch (const NumericalError& e) {
    rethrow_with(e, where);
  } catch (const ResourceError& e) {
    rethrow_with(e, where);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<SweepRecord> run_grid(const SweepSpec& spec, unsigned workers) {
  spec.validate();
  std::vector<SweepPoint> points;
  for (int n : spec.n_qubits) {
    for (double u : spec.log2_upsilon) {
      if (spec.noise.empty()) {
        points.push_back({n, u, std::nullopt});
      } else {
        for (const auto& nz : spec.noise) points.push_back({n, u, nz});
      }
    }
  }
  std::vector<SweepRecord> records(points.size());
  auto work = [&](unsigned w, unsigned stride) {
    for (std::size_t i = w; i < points.size(); i += stride) {
      try {
        records[i] = run_point(spec, points[i]);
      } catch (const std::exception& e) {
        SweepRecord& r = records[i];
        r.n_qubits = points[i].n_qubits;
        r.log2_upsilon = points[i].log2_upsilon;
        r.upsilon = std::exp2(points[i].log2_upsilon);
        r.tau = 2.0 * spec.lambda_max / r.upsilon;
        r.open = points[i].noise.has_value();
        if (r.open) {
          r.kappa = points[i].noise->kappa;
          r.n_bar = points[i].noise->n_bar;
        }
        r.failed = true;
        r.error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return std::tie(a.n_qubits, a.upsilon, a.kappa, a.n_bar) < std::tie(b.n_qubits, b.upsilon, b.kappa, b.n_bar);
  });
  return records;
}

std::vector<RegimeBoundary> regime_boundaries(const std::vector<SweepRecord>& records, ThresholdRule rule,
                                              double level) {
  std::vector<RegimeBoundary> out;
  std::vector<int> ns;
  for (const auto& r : records) {
    if (!r.open && !r.failed && std::find(ns.begin(), ns.end(), r.n_qubits) == ns.end()) ns.push_back(r.n_qubits);
  }
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    std::vector<const SweepRecord*> row;
    for (const auto& r : records) {
      if (r.n_qubits == n && !r.open && !r.failed) row.push_back(&r);
    }
    std::sort(row.begin(), row.end(), [](auto* a, auto* b) { return a->log2_upsilon < b->log2_upsilon; });
    RegimeBoundary b;
    b.n_qubits = n;
    for (auto* r : row) b.row_max = std::max(b.row_max, r->s_final);
    b.threshold = rule == ThresholdRule::relative_to_row_max ? level * b.row_max : level;
    for (auto* r : row) {
      if (r->s_final > b.threshold) {
        if (!b.found) b.log2_upsilon_min = r->log2_upsilon;
        b.found = true;
        b.log2_upsilon_max = r->log2_upsilon;
      }
    }
    out.push_back(b);
  }
  return out;
}

LineFit log_log_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("log_log_fit needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log_log_fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw ConfigError("log_log_fit needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace dicke
