#include "dicke/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dicke/error.hpp"

namespace dicke {

using nlohmann::json;

namespace {

// Tracks the key path of the value being read so errors can point at it.
class Node {
 public:
  Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return v_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!v_.is_object()) fail("expected an object");
    for (const auto& [key, _] : v_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) {
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        throw ConfigError(path_ + "." + key + ": unknown key (allowed: " + list + ")");
      }
    }
  }

  bool has(const char* key) const { return v_.contains(key); }
  Node child(const char* key) const { return {v_.at(key), path_ + "." + key}; }
  Node element(std::size_t i) const { return {v_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  double number() const {
    if (!v_.is_number()) fail("expected a number");
    const double x = v_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }
  long long integer() const {
    if (!v_.is_number_integer()) fail("expected an integer");
    return v_.get<long long>();
  }
  std::uint64_t unsigned_integer() const {
    if (v_.is_number_unsigned()) return v_.get<std::uint64_t>();
    if (v_.is_number_integer() && v_.get<long long>() >= 0) return static_cast<std::uint64_t>(v_.get<long long>());
    fail("expected a nonnegative integer");
  }
  std::size_t count() const {
    const long long n = integer();
    if (n < 1) fail("expected a positive integer");
    return static_cast<std::size_t>(n);
  }
  std::string string() const {
    if (!v_.is_string()) fail("expected a string");
    return v_.get<std::string>();
  }
  std::size_t size() const {
    if (!v_.is_array()) fail("expected an array");
    return v_.size();
  }

 private:
  const json& v_;
  std::string path_;
};

void read(const Node& n, const char* key, double& out) {
  if (n.has(key)) out = n.child(key).number();
}
void read(const Node& n, const char* key, int& out) {
  if (n.has(key)) out = static_cast<int>(n.child(key).integer());
}
void read(const Node& n, const char* key, std::size_t& out) {
  if (n.has(key)) out = n.child(key).count();
}

// Either an explicit list or {"from", "to", "step"} with inclusive end.
std::vector<double> number_axis(const Node& n) {
  std::vector<double> out;
  if (n.raw().is_array()) {
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.element(i).number());
  } else {
    n.expect_object({"from", "to", "step"});
    for (const char* k : {"from", "to", "step"}) {
      if (!n.has(k)) n.fail(std::string("range needs '") + k + "'");
    }
    const double from = n.child("from").number();
    const double to = n.child("to").number();
    const double step = n.child("step").number();
    if (!(step > 0.0) || to < from) n.fail("range needs step > 0 and to >= from");
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    if (count > 100000) n.fail("range has too many points");
    for (std::size_t i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
  }
  if (out.empty()) n.fail("expected at least one value");
  return out;
}

NoiseParams noise_from(const Node& n) {
  n.expect_object({"kappa", "n_bar"});
  NoiseParams p;
  if (!n.has("kappa")) n.fail("missing 'kappa'");
  p.kappa = n.child("kappa").number();
  read(n, "n_bar", p.n_bar);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return p;
}

json parse_strict(const std::string& text, const std::string& source) {
  // Duplicate keys are silently merged by the parser, so reject them here.
  std::vector<std::set<std::string>> seen;
  auto cb = [&](int, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_start) {
      seen.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      seen.pop_back();
    } else if (event == json::parse_event_t::key) {
      const auto key = parsed.get<std::string>();
      if (!seen.back().insert(key).second) throw ConfigError(source + ": duplicate key '" + key + "'");
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

PulseSchedule PulseSection::schedule() const {
  if (tau) return PulseSchedule(lambda_max, *tau);
  return PulseSchedule::from_log2_velocity(lambda_max, *log2_upsilon);
}

DickeParams RunConfig::params(int n_max) const {
  DickeParams p{model.n_qubits, model.epsilon, model.omega, n_max};
  p.validate();
  return p;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  const json doc = parse_strict(text, source);
  const Node root(doc, "$");
  root.expect_object({"model", "pulse", "solver", "noise", "output", "seed", "sweep", "wigner", "kicks", "gs"});
  RunConfig c;

  if (root.has("model")) {
    const Node m = root.child("model");
    m.expect_object({"N", "epsilon", "omega", "n_max"});
    read(m, "N", c.model.n_qubits);
    read(m, "epsilon", c.model.epsilon);
    read(m, "omega", c.model.omega);
    if (m.has("n_max")) {
      const Node nm = m.child("n_max");
      if (nm.raw().is_string()) {
        if (nm.string() != "auto") nm.fail("expected an integer or \"auto\"");
      } else {
        c.model.n_max = static_cast<int>(nm.integer());
      }
    }
    try {
      c.params(c.model.n_max.value_or(16));
    } catch (const ConfigError& e) {
      m.fail(e.what());
    }
  }

  {
    bool have_tau = false, have_u = false;
    if (root.has("pulse")) {
      const Node p = root.child("pulse");
      p.expect_object({"lambda_max", "tau", "log2_upsilon"});
      read(p, "lambda_max", c.pulse.lambda_max);
      have_tau = p.has("tau");
      have_u = p.has("log2_upsilon");
      if (have_tau && have_u) p.fail("give exactly one of 'tau' and 'log2_upsilon'");
      if (have_tau) c.pulse.tau = p.child("tau").number();
      if (have_u) c.pulse.log2_upsilon = p.child("log2_upsilon").number();
      if (!(c.pulse.lambda_max >= 0.0)) p.fail("lambda_max must be >= 0");
      if (c.pulse.lambda_max == 0.0 && !have_tau) p.fail("lambda_max = 0 needs an explicit 'tau'");
    }
    if (!have_tau && !have_u) c.pulse.log2_upsilon = -5.0;
    try {
      // Constructing the schedule enforces tau = 2 lambda_max / upsilon and positivity.
      (void)c.pulse.schedule();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("$.pulse: ") + e.what());
    }
  }

  if (root.has("solver")) {
    const Node s = root.child("solver");
    s.expect_object({"snapshots", "base_step", "fixed_step", "chebyshev_tolerance", "leakage_tolerance",
                     "positivity_tolerance", "truncation_start", "truncation_stride", "truncation_cap",
                     "truncation_fidelity_tolerance"});
    read(s, "snapshots", c.solver.snapshots);
    if (c.solver.snapshots < 2) s.child("snapshots").fail("need at least 2 snapshots");
    read(s, "base_step", c.solver.control.base_step);
    read(s, "fixed_step", c.solver.control.fixed_step);
    read(s, "chebyshev_tolerance", c.solver.control.chebyshev_tolerance);
    read(s, "leakage_tolerance", c.solver.control.leakage_tolerance);
    read(s, "positivity_tolerance", c.solver.positivity_tolerance);
    read(s, "truncation_start", c.solver.truncation.start);
    read(s, "truncation_stride", c.solver.truncation.stride);
    read(s, "truncation_cap", c.solver.truncation.cap);
    read(s, "truncation_fidelity_tolerance", c.solver.truncation.fidelity_tolerance);
    if (!(c.solver.control.base_step > 0.0) || c.solver.control.fixed_step < 0.0) {
      s.fail("base_step must be > 0 and fixed_step >= 0");
    }
    if (!(c.solver.control.chebyshev_tolerance > 0.0) || !(c.solver.control.leakage_tolerance > 0.0) ||
        !(c.solver.positivity_tolerance > 0.0) || !(c.solver.truncation.fidelity_tolerance > 0.0)) {
      s.fail("tolerances must be > 0");
    }
    if (c.solver.truncation.start < 1 || c.solver.truncation.stride < 1 ||
        c.solver.truncation.cap < c.solver.truncation.start) {
      s.fail("truncation ladder needs start >= 1, stride >= 1, cap >= start");
    }
  }
  c.solver.truncation.leakage_tolerance = c.solver.control.leakage_tolerance;
  c.solver.truncation.automatic = !c.model.n_max.has_value();
  if (c.model.n_max) c.solver.truncation.fixed_n_max = *c.model.n_max;

  if (root.has("noise")) c.noise = noise_from(root.child("noise"));

  if (root.has("output")) {
    const Node o = root.child("output");
    o.expect_object({"directory"});
    if (o.has("directory")) c.output.directory = o.child("directory").string();
  }

  if (root.has("seed")) c.seed = root.child("seed").unsigned_integer();

  c.sweep.n_qubits = {c.model.n_qubits};
  if (c.pulse.log2_upsilon) c.sweep.log2_upsilon = {*c.pulse.log2_upsilon};
  if (root.has("sweep")) {
    const Node s = root.child("sweep");
    s.expect_object({"N", "log2_upsilon", "noise"});
    if (s.has("N")) {
      const Node ns = s.child("N");
      c.sweep.n_qubits.clear();
      for (std::size_t i = 0; i < ns.size(); ++i) {
        const long long n = ns.element(i).integer();
        if (n < 1) ns.element(i).fail("N must be >= 1");
        c.sweep.n_qubits.push_back(static_cast<int>(n));
      }
      if (c.sweep.n_qubits.empty()) ns.fail("expected at least one value");
    }
    if (s.has("log2_upsilon")) c.sweep.log2_upsilon = number_axis(s.child("log2_upsilon"));
    if (s.has("noise")) {
      const Node nz = s.child("noise");
      for (std::size_t i = 0; i < nz.size(); ++i) c.sweep.noise.push_back(noise_from(nz.element(i)));
    }
  }

  c.wigner.times = {0.0};
  if (root.has("wigner")) {
    const Node w = root.child("wigner");
    w.expect_object({"times", "plane_extent", "plane_points", "theta_points", "phi_points"});
    if (w.has("times")) {
      c.wigner.times = number_axis(w.child("times"));
      for (double t : c.wigner.times) {
        if (t < 0.0) w.child("times").fail("times must be >= 0");
      }
    }
    double extent = 6.0;
    std::size_t points = 201;
    read(w, "plane_extent", extent);
    read(w, "plane_points", points);
    if (!(extent > 0.0) || points < 2) w.fail("plane needs extent > 0 and at least 2 points");
    c.wigner.plane.x = {-extent, extent, points};
    c.wigner.plane.p = {-extent, extent, points};
    read(w, "theta_points", c.wigner.sphere.theta_count);
    read(w, "phi_points", c.wigner.sphere.phi_count);
    if (c.wigner.sphere.theta_count < 2 || c.wigner.sphere.phi_count < 3) w.fail("sphere grid too small");
  }

  if (root.has("kicks")) {
    const Node k = root.child("kicks");
    k.expect_object({"protocol", "eps", "n_kicks", "n_traj", "estimator"});
    try {
      if (k.has("protocol")) c.kicks.protocol.mixing = mixing_rule_from_string(k.child("protocol").string());
    } catch (const ConfigError& e) {
      k.child("protocol").fail(e.what());
    }
    read(k, "eps", c.kicks.protocol.eps);
    read(k, "n_kicks", c.kicks.n_kicks);
    read(k, "n_traj", c.kicks.n_traj);
    if (k.has("estimator")) {
      const std::string est = k.child("estimator").string();
      if (est == "sampled") {
        c.kicks.estimator = KickEstimator::sampled;
      } else if (est == "conditional") {
        c.kicks.estimator = KickEstimator::conditional;
      } else {
        k.child("estimator").fail("expected \"sampled\" or \"conditional\"");
      }
    }
    try {
      c.kicks.protocol.validate();
    } catch (const ConfigError& e) {
      k.fail(e.what());
    }
  }

  c.gs.lambdas = number_axis(Node(json::array({0.0, 0.25, 0.5, 0.75, 1.0}), "$.gs.lambda"));
  if (root.has("gs")) {
    const Node g = root.child("gs");
    g.expect_object({"lambda"});
    if (g.has("lambda")) c.gs.lambdas = number_axis(g.child("lambda"));
    for (double l : c.gs.lambdas) {
      if (l < 0.0) g.child("lambda").fail("lambda must be >= 0");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string canonical_json(const RunConfig& c) {
  json j;
  j["model"] = {{"N", c.model.n_qubits}, {"epsilon", c.model.epsilon}, {"omega", c.model.omega}};
  j["model"]["n_max"] = c.model.n_max ? json(*c.model.n_max) : json("auto");
  j["pulse"] = {{"lambda_max", c.pulse.lambda_max}};
  if (c.pulse.tau) j["pulse"]["tau"] = *c.pulse.tau;
  if (c.pulse.log2_upsilon) j["pulse"]["log2_upsilon"] = *c.pulse.log2_upsilon;
  const auto& s = c.solver;
  j["solver"] = {{"snapshots", s.snapshots},
                 {"base_step", s.control.base_step},
                 {"fixed_step", s.control.fixed_step},
                 {"chebyshev_tolerance", s.control.chebyshev_tolerance},
                 {"leakage_tolerance", s.control.leakage_tolerance},
                 {"positivity_tolerance", s.positivity_tolerance},
                 {"truncation_start", s.truncation.start},
                 {"truncation_stride", s.truncation.stride},
                 {"truncation_cap", s.truncation.cap},
                 {"truncation_fidelity_tolerance", s.truncation.fidelity_tolerance}};
  if (c.noise) j["noise"] = {{"kappa", c.noise->kappa}, {"n_bar", c.noise->n_bar}};
  j["seed"] = c.seed;
  json noise = json::array();
  for (const auto& n : c.sweep.noise) noise.push_back({{"kappa", n.kappa}, {"n_bar", n.n_bar}});
  j["sweep"] = {{"N", c.sweep.n_qubits}, {"log2_upsilon", c.sweep.log2_upsilon}, {"noise", noise}};
  j["wigner"] = {{"times", c.wigner.times},
                 {"plane_extent", c.wigner.plane.x.hi},
                 {"plane_points", c.wigner.plane.x.count},
                 {"theta_points", c.wigner.sphere.theta_count},
                 {"phi_points", c.wigner.sphere.phi_count}};
  j["kicks"] = {{"protocol", to_string(c.kicks.protocol.mixing)},
                {"eps", c.kicks.protocol.eps},
                {"n_kicks", c.kicks.n_kicks},
                {"n_traj", c.kicks.n_traj},
                {"estimator", c.kicks.estimator == KickEstimator::sampled ? "sampled" : "conditional"}};
  j["gs"] = {{"lambda", c.gs.lambdas}};
  return j.dump();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dicke
