#include "dicke/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dicke/config.hpp"
#include "dicke/error.hpp"
#include "dicke/integrate.hpp"
#include "dicke/kernels.hpp"
#include "dicke/kicks.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/observables.hpp"
#include "dicke/sweep.hpp"
#include "dicke/wigner.hpp"

#ifndef DICKE_VERSION
#define DICKE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace dicke {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ResourceError("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw ResourceError("write failed");
  }

 private:
  std::ofstream out_;
};

struct Context {
  RunConfig config;
  CommandOptions options;
  fs::path dir;
  unsigned workers = 1;
  std::vector<std::string> files;
  json results = json::object();
  /// Wall-clock data lives apart from the manifest so the manifest stays reproducible.
  json timing = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path file(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
  void note(const std::string& msg) const {
    if (!options.quiet) std::cerr << msg << '\n';
  }
};

fs::path resolve_directory(const CommandOptions& opt, const RunConfig& cfg) {
  if (opt.out_dir) return *opt.out_dir;
  if (cfg.output.directory) return *cfg.output.directory;
  const char* root = std::getenv(kOutRootEnv);
  const fs::path base = root && *root ? fs::path(root) : fs::path("dicke-out");
  return base / (opt.command + "-" + config_hash(cfg).substr(0, 12));
}

void prepare_directory(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw ConfigError("output path '" + dir.string() + "' is not a directory");
    if (!fs::is_empty(dir, ec) && !overwrite) {
      throw ConfigError("output directory '" + dir.string() + "' is not empty; pass --overwrite to replace its files");
    }
    return;
  }
  fs::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string manifest_name() { return "manifest.json"; }

void write_manifest(Context& ctx) {
  ctx.timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  {
    std::ofstream out(ctx.file("timing.json"), std::ios::binary);
    out << ctx.timing.dump(2) << '\n';
    if (!out) throw ResourceError("cannot write timing in '" + ctx.dir.string() + "'");
  }
  json m;
  m["command"] = ctx.options.command;
  m["version"] = DICKE_VERSION;
  m["config_hash"] = config_hash(ctx.config);
  m["config"] = json::parse(canonical_json(ctx.config));
  if (ctx.options.config_path) m["config_path"] = *ctx.options.config_path;
  m["seed"] = ctx.config.seed;
  m["workers"] = ctx.workers;
  m["simd_backend"] = std::string(kernels::backend_name(kernels::active_backend()));
  m["files"] = ctx.files;
  m["results"] = ctx.results;
  std::ofstream out(ctx.dir / manifest_name(), std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw ResourceError("cannot write manifest in '" + ctx.dir.string() + "'");
  ctx.files.push_back(manifest_name());
}

json ladder_json(const TruncationResult& t) {
  json rungs = json::array();
  for (const auto& r : t.ladder) {
    rungs.push_back({{"n_max", r.n_max},
                     {"max_leakage", r.max_leakage},
                     {"fidelity_to_next", std::isnan(r.fidelity_to_next) ? json(nullptr) : json(r.fidelity_to_next)}});
  }
  return {{"selected_n_max", t.n_max}, {"ladder", rungs}};
}

// Fixed n_max from the config, or the closed-system ladder.
int choose_n_max(Context& ctx, const PulseSchedule& schedule) {
  if (ctx.config.model.n_max) return *ctx.config.model.n_max;
  const auto t = auto_truncation(ctx.config.params(ctx.config.solver.truncation.start), schedule,
                                 ctx.config.solver.truncation, ctx.config.solver.control);
  ctx.results["truncation"] = ladder_json(t);
  return t.n_max;
}

void cmd_evolve(Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.noise) throw ConfigError("evolve is closed-system only; use 'open' for a config with a noise section");
  const PulseSchedule schedule = cfg.pulse.schedule();
  const DickeParams params = cfg.params(choose_n_max(ctx, schedule));
  const Basis basis(params);
  const PureState psi0 = initial_state(basis);
  CsvWriter csv(ctx.file("trajectory.csv"),
                {"t", "lambda", "S_bits", "Jz", "photon_number", "parity", "fidelity_to_initial"});
  double s_max = 0.0;
  auto sink = [&](const Snapshot& snap) {
    const auto o = scalar_observables(snap.state);
    s_max = std::max(s_max, o.s_bits);
    csv.row({snap.t, snap.lambda, o.s_bits, o.jz, o.photon_number, o.parity, fidelity(snap.state, psi0)});
  };
  IntegratorStats stats;
  propagate(psi0, params, schedule, uniform_times(schedule.tau(), cfg.solver.snapshots), cfg.solver.control, sink,
            &stats);
  csv.close();
  ctx.results["n_max"] = params.n_max;
  ctx.results["tau"] = schedule.tau();
  ctx.results["upsilon"] = schedule.upsilon();
  ctx.results["S_max_bits"] = s_max;
  ctx.results["steps"] = stats.steps;
  ctx.results["step"] = stats.step;
  ctx.results["matvecs"] = stats.matvecs;
  ctx.results["max_norm_drift"] = stats.max_norm_drift;
  ctx.results["max_leakage"] = stats.max_leakage;
}

void cmd_open(Context& ctx) {
  const auto& cfg = ctx.config;
  if (!cfg.noise) throw ConfigError("open needs a 'noise' section with kappa (and optionally n_bar)");
  const PulseSchedule schedule = cfg.pulse.schedule();
  const DickeParams params = cfg.params(choose_n_max(ctx, schedule));
  const Basis basis(params);
  if (basis.dim() > kLindbladDimensionCap) {
    throw ResourceError("open-system dimension " + std::to_string(basis.dim()) + " = (N+1)(n_max+1) exceeds the cap " +
                        std::to_string(kLindbladDimensionCap));
  }
  const PureState psi0 = initial_state(basis);
  const DensityMatrix rho0 = DensityMatrix::from_pure(psi0);
  OpenControl ctrl;
  ctrl.base = cfg.solver.control;
  ctrl.positivity_tolerance = cfg.solver.positivity_tolerance;
  CsvWriter csv(ctx.file("trajectory.csv"), {"t", "lambda", "S_bits", "Jz", "photon_number", "parity",
                                             "fidelity_to_initial", "negativity", "log_negativity"});
  double neg_max = 0.0;
  auto sink = [&](const OpenSnapshot& snap) {
    const auto o = scalar_observables(snap.rho);
    const auto n = negativity(snap.rho);
    neg_max = std::max(neg_max, n.negativity);
    csv.row({snap.t, snap.lambda, o.s_bits, o.jz, o.photon_number, o.parity, snap.rho.rho(0, 0).real(), n.negativity,
             n.log_negativity});
  };
  OpenStats stats;
  propagate_open(rho0, params, schedule, *cfg.noise, uniform_times(schedule.tau(), cfg.solver.snapshots), ctrl, sink,
                 &stats);
  csv.close();
  ctx.results["n_max"] = params.n_max;
  ctx.results["tau"] = schedule.tau();
  ctx.results["upsilon"] = schedule.upsilon();
  ctx.results["negativity_peak"] = neg_max;
  ctx.results["steps"] = stats.steps;
  ctx.results["liouvillian_applications"] = stats.liouvillian_applications;
  ctx.results["max_trace_drift"] = stats.max_trace_drift;
  ctx.results["max_hermiticity_drift"] = stats.max_hermiticity_drift;
  ctx.results["min_eigenvalue"] = stats.min_eigenvalue;
  ctx.results["max_leakage"] = stats.max_leakage;
}

void cmd_sweep(Context& ctx) {
  const auto& cfg = ctx.config;
  SweepSpec spec;
  spec.n_qubits = cfg.sweep.n_qubits;
  spec.log2_upsilon = cfg.sweep.log2_upsilon;
  spec.lambda_max = cfg.pulse.lambda_max;
  spec.epsilon = cfg.model.epsilon;
  spec.omega = cfg.model.omega;
  spec.noise = cfg.sweep.noise;
  spec.snapshots = cfg.solver.snapshots;
  spec.truncation = cfg.solver.truncation;
  spec.control = cfg.solver.control;
  spec.seed = cfg.seed;
  const auto records = run_grid(spec, ctx.workers);

  CsvWriter csv(ctx.file("sweep.csv"),
                {"N", "log2_upsilon", "upsilon", "tau", "kappa", "n_bar", "n_max", "S_final", "S_peak", "t_peak",
                 "fidelity_final", "negativity_peak", "t_negativity_peak", "symmetry_residual", "max_norm_drift",
                 "max_parity_deviation", "max_leakage", "converged", "failed"});
  json points = json::array();
  std::size_t failures = 0;
  for (const auto& r : records) {
    csv.row({double(r.n_qubits), r.log2_upsilon, r.upsilon, r.tau, r.kappa, r.n_bar, double(r.n_max), r.s_final,
             r.s_peak, r.t_peak, r.fidelity_final, r.negativity_peak, r.t_negativity_peak, r.symmetry_residual,
             r.max_norm_drift, r.max_parity_deviation, r.max_leakage, r.converged ? 1.0 : 0.0, r.failed ? 1.0 : 0.0});
    json p = {{"N", r.n_qubits}, {"log2_upsilon", r.log2_upsilon}, {"kappa", r.kappa}, {"n_bar", r.n_bar},
              {"n_max", r.n_max}, {"converged", r.converged}};
    ctx.timing["points"].push_back({{"N", r.n_qubits}, {"log2_upsilon", r.log2_upsilon}, {"kappa", r.kappa},
                                    {"n_bar", r.n_bar}, {"wall_seconds", r.wall_seconds}});
    if (r.failed) {
      p["error"] = r.error;
      ++failures;
      ctx.note("point failed: " + r.error);
    }
    points.push_back(p);
  }
  csv.close();

  if (spec.noise.empty()) {
    CsvWriter b(ctx.file("boundaries.csv"),
                {"N", "rule", "level", "row_max", "threshold", "found", "log2_upsilon_min", "log2_upsilon_max"});
    for (const auto& [rule, level] : {std::pair{ThresholdRule::absolute_bits, 1.0},
                                      std::pair{ThresholdRule::relative_to_row_max, 0.5}}) {
      for (const auto& rb : regime_boundaries(records, rule, level)) {
        b.row({double(rb.n_qubits), rule == ThresholdRule::absolute_bits ? 0.0 : 1.0, level, rb.row_max, rb.threshold,
               rb.found ? 1.0 : 0.0, rb.log2_upsilon_min, rb.log2_upsilon_max});
      }
    }
    b.close();
  }
  ctx.results["points"] = points;
  ctx.results["failures"] = failures;
}

void write_field(const fs::path& path, const WignerField& f, const char* a, const char* b) {
  CsvWriter csv(path, {a, b, "W"});
  for (std::size_t i = 0; i < f.first.count; ++i) {
    for (std::size_t k = 0; k < f.second.count; ++k) csv.row({f.first.node(i), f.second.node(k), f.at(i, k)});
  }
  csv.close();
}

json field_summary(const WignerField& f, const std::string& file) {
  return {{"file", file},
          {"integral", f.integral()},
          {"min", f.min_value()},
          {"negativity_volume", negativity_volume(f)},
          {"max_imaginary_residue", f.max_imaginary_residue},
          {"mass_outside", f.mass_outside},
          {"warnings", f.warnings}};
}

void cmd_wigner(Context& ctx) {
  const auto& cfg = ctx.config;
  const PulseSchedule schedule = cfg.pulse.schedule();
  const DickeParams params = cfg.params(choose_n_max(ctx, schedule));
  const Basis basis(params);
  const auto& times = cfg.wigner.times;
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  std::vector<double> sorted;
  for (auto i : order) sorted.push_back(times[i]);

  // Reduced states at the requested times, in request order.
  std::vector<ReducedState> spin(times.size()), boson(times.size());
  std::vector<double> lambdas(times.size());
  std::size_t next = 0;
  auto take = [&](double lambda, auto&& reduce_fn) {
    const std::size_t idx = order[next++];
    lambdas[idx] = lambda;
    spin[idx] = reduce_fn(Subsystem::spin);
    boson[idx] = reduce_fn(Subsystem::boson);
  };
  if (cfg.noise) {
    OpenControl ctrl;
    ctrl.base = cfg.solver.control;
    ctrl.positivity_tolerance = cfg.solver.positivity_tolerance;
    propagate_open(DensityMatrix::from_pure(initial_state(basis)), params, schedule, *cfg.noise, sorted, ctrl,
                   [&](const OpenSnapshot& s) { take(s.lambda, [&](Subsystem k) { return reduce(s.rho, k); }); });
  } else {
    propagate(initial_state(basis), params, schedule, sorted, cfg.solver.control,
              [&](const Snapshot& s) { take(s.lambda, [&](Subsystem k) { return reduce(s.state, k); }); });
  }

  json fields = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%02zu", i);
    const FieldProvenance prov{times[i], schedule.upsilon(), params.n_qubits, lambdas[i]};
    WignerField ws = agarwal_wigner(spin_multipoles(spin[i]), cfg.wigner.sphere);
    ws.provenance = prov;
    WignerField wb = boson_wigner(boson[i], cfg.wigner.plane);
    wb.provenance = prov;
    const std::string fs_name = std::string("wigner_spin_") + tag + ".csv";
    const std::string fb_name = std::string("wigner_boson_") + tag + ".csv";
    write_field(ctx.file(fs_name), ws, "theta", "phi");
    write_field(ctx.file(fb_name), wb, "x", "p");
    for (const auto& w : wb.warnings) ctx.note("t=" + format_number(times[i]) + ": " + w);
    fields.push_back({{"index", i},
                      {"t", times[i]},
                      {"lambda", lambdas[i]},
                      {"upsilon", prov.upsilon},
                      {"N", prov.n_qubits},
                      {"spin", field_summary(ws, fs_name)},
                      {"boson", field_summary(wb, fb_name)}});
  }
  ctx.results["n_max"] = params.n_max;
  ctx.results["fields"] = fields;
}

void cmd_kicks(Context& ctx) {
  const auto& k = ctx.config.kicks;
  const DecayCurve curve = coherence_decay(k.protocol, k.n_kicks, k.n_traj, ctx.config.seed, k.estimator, ctx.workers);
  CsvWriter csv(ctx.file("kicks.csv"), {"K", "coherence", "stderr", "ratio", "mean_re", "mean_im"});
  std::size_t k_hi = 0;
  for (std::size_t K = 0; K < curve.coherence.size(); ++K) {
    const double ratio = K == 0 ? std::nan("") : curve.coherence[K] / curve.coherence[K - 1];
    csv.row({double(K), curve.coherence[K], curve.stderr_[K], ratio, curve.mean[K].real(), curve.mean[K].imag()});
    if (K >= 1 && K == k_hi + 1 && curve.coherence[K] > 5.0 * curve.stderr_[K]) k_hi = K;
  }
  csv.close();
  ctx.results["transfer_matrix_rate"] = transfer_matrix_rate(k.protocol, false);
  ctx.results["transfer_matrix_rate_eps0"] = transfer_matrix_rate(k.protocol, true);
  if (k_hi >= 2) {
    const RateFit fit = fit_decay_rate(curve, 1, k_hi);
    ctx.results["fit"] = {{"k_lo", 1}, {"k_hi", k_hi}, {"rate", fit.rate}, {"stderr", fit.stderr_}};
  }
}

void cmd_gs(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto& lambdas = cfg.gs.lambdas;
  const auto& pol = cfg.solver.truncation;
  struct Row {
    double energy, gap, s, jz, n, parity;
    int n_max;
  };
  auto solve = [&](int n_max, double lambda) {
    const DickeParams params = cfg.params(n_max);
    const Basis basis(params);
    const GroundState gs = ground_state(params, basis, lambda);
    const PureState psi{basis, gs.amplitudes, 0.0};
    const auto o = scalar_observables(psi);
    return std::pair{Row{gs.energy, gs.gap, o.s_bits, o.jz, o.photon_number, o.parity, n_max}, top_level_occupation(psi)};
  };
  std::vector<Row> rows;
  for (double lambda : lambdas) {
    if (cfg.model.n_max) {
      rows.push_back(solve(*cfg.model.n_max, lambda).first);
      continue;
    }
    // Grow n_max until the entropy is stable and the top levels are empty.
    auto cur = solve(pol.start, lambda);
    for (int n = pol.start + pol.stride;; n += pol.stride) {
      if (n > pol.cap) {
        throw ResourceError("ground state at lambda=" + format_number(lambda) + " not converged below n_max cap " +
                            std::to_string(pol.cap));
      }
      auto nxt = solve(n, lambda);
      if (cur.second < pol.leakage_tolerance && std::abs(nxt.first.s - cur.first.s) < 1e-8) break;
      cur = nxt;
    }
    rows.push_back(cur.first);
  }
  CsvWriter csv(ctx.file("gs.csv"),
                {"lambda", "energy", "gap", "S_bits", "Jz", "photon_number", "parity", "n_max", "dS_dlambda"});
  double best = -1.0, best_lambda = std::nan("");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double d = std::nan("");
    if (rows.size() > 1) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == rows.size() ? i : i + 1;
      d = (rows[hi].s - rows[lo].s) / (lambdas[hi] - lambdas[lo]);
      if (d > best) {
        best = d;
        best_lambda = lambdas[i];
      }
    }
    const Row& r = rows[i];
    csv.row({lambdas[i], r.energy, r.gap, r.s, r.jz, r.n, r.parity, double(r.n_max), d});
  }
  csv.close();
  ctx.results["critical_coupling"] = DickeParams{cfg.model.n_qubits, cfg.model.epsilon, cfg.model.omega, 1}.critical_coupling();
  if (!std::isnan(best_lambda)) ctx.results["lambda_max_dS_dlambda"] = best_lambda;
}

}  // namespace

CommandResult run_command(const CommandOptions& options) {
  Context ctx;
  ctx.options = options;
  ctx.config = options.config_path ? load_config(*options.config_path) : parse_config("{}", "<defaults>");
  if (options.seed) ctx.config.seed = *options.seed;
  ctx.workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  ctx.dir = resolve_directory(options, ctx.config);
  prepare_directory(ctx.dir, options.overwrite);

  const std::string& c = options.command;
  if (c == "evolve") {
    cmd_evolve(ctx);
  } else if (c == "open") {
    cmd_open(ctx);
  } else if (c == "sweep") {
    cmd_sweep(ctx);
  } else if (c == "wigner") {
    cmd_wigner(ctx);
  } else if (c == "kicks") {
    cmd_kicks(ctx);
  } else if (c == "gs") {
    cmd_gs(ctx);
  } else {
    throw ConfigError("unknown command '" + c + "'");
  }
  write_manifest(ctx);
  return {ctx.dir, ctx.files};
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Pulsed driving of the finite-N Dicke model"};
  app.set_version_flag("--version", DICKE_VERSION);
  app.require_subcommand(1);
  CommandOptions opt;
  std::string config, out;
  std::uint64_t seed = 0;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"evolve", "closed-system cycle: entropy and observables vs time"},
      {"open", "master-equation cycle with cavity loss: adds negativity"},
      {"sweep", "grid over N and log2(upsilon): final and peak entropy table"},
      {"wigner", "spin-sphere and boson-plane Wigner fields at chosen times"},
      {"kicks", "correlated phase-kick coherence decay"},
      {"gs", "ground-state scan over lambda"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, std::string("output directory (default: $") + kOutRootEnv + "/<command>-<hash>)");
    sub->add_option("--seed", seed, "RNG seed, overrides the config");
    sub->add_option("--workers", opt.workers, "worker threads (default: hardware concurrency)")
        ->check(CLI::Range(1u, 4096u));
    sub->add_flag("--overwrite", opt.overwrite, "allow writing into a non-empty output directory");
    sub->add_flag("--quiet", opt.quiet, "suppress progress notes");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    opt.command = sub->get_name();
    if (sub->count("--config")) opt.config_path = config;
    if (sub->count("--out")) opt.out_dir = out;
    if (sub->count("--seed")) opt.seed = seed;
  }
  try {
    const CommandResult r = run_command(opt);
    if (!opt.quiet) std::cout << r.directory.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dicke
