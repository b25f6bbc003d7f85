#include "magcat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace magcat {

namespace {

/// Object reader that records consumed keys so leftovers can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key_path(key), "must be finite");
    return x;
  }

  /// MHz in the file, rad/us in memory.
  double frequency(const std::string& key, double fallback) { return mhz(number(key, to_mhz(fallback))); }

  std::optional<double> optional_frequency(const std::string& key, std::optional<double> fallback) {
    if (!has(key)) return fallback;
    if (raw(key).is_null()) return std::nullopt;
    return mhz(number(key, 0.0));
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a finite number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), key_path(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Axis read_axis(Reader& r, const std::string& key, const Axis& fallback) {
  if (!r.has(key)) return fallback;
  const auto v = r.numbers(key);
  if (v.size() != 3) throw ConfigError(r.key_path(key), "expected [min, max, count]");
  if (!(v[1] > v[0]) || v[2] < 2 || v[2] != std::floor(v[2])) throw ConfigError(r.key_path(key), "needs min < max and an integer count >= 2");
  return Axis{v[0], v[1], static_cast<int>(v[2])};
}

void read_params(Reader r, PhysicalParams& p) {
  p.omega_c = r.frequency("omega_c", p.omega_c);
  p.omega = r.frequency("omega", p.omega);
  p.omega_q = r.optional_frequency("omega_q", p.omega_q);
  p.omega_m = r.optional_frequency("omega_m", p.omega_m);
  p.g_q = r.frequency("g_q", p.g_q);
  p.g_m = r.frequency("g_m", p.g_m);
  p.eta1 = r.frequency("eta1", p.eta1);
  p.eta2 = r.frequency("eta2", p.eta2);
  p.eta3 = r.frequency("eta3", p.eta3);
  p.eps_p = r.frequency("eps_p", p.eps_p);
  p.omega1 = r.frequency("omega1", p.omega1);
  p.omega2 = r.optional_frequency("omega2", p.omega2);
  p.omega3 = r.optional_frequency("omega3", p.omega3);
  p.omega_p = r.optional_frequency("omega_p", p.omega_p);
  p.phi1 = r.number("phi1", p.phi1);
  p.phi2 = r.number("phi2", p.phi2);
  p.phi3 = r.number("phi3", p.phi3);
  r.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }
}

InitialState read_initial(Reader r) {
  InitialState s;
  const std::string type = r.string("type", "fock");
  const std::string qubit = r.string("qubit", "down");
  if (qubit == "down") {
    s.qubit = 0;
  } else if (qubit == "up") {
    s.qubit = 1;
  } else {
    throw ConfigError(r.key_path("qubit"), "expected \"down\" or \"up\"");
  }
  if (type == "fock") {
    s.kind = InitialState::Kind::Fock;
    s.n = r.integer("n", 0);
    if (s.n < 0) throw ConfigError(r.key_path("n"), "must be nonnegative");
  } else if (type == "superposition") {
    s.kind = InitialState::Kind::Superposition;
    s.superposition.theta_b = r.number("theta_b", kPi / 2.0);
    s.superposition.phi_b = r.number("phi_b", kPi / 2.0);
    if (s.superposition.theta_b < 0.0 || s.superposition.theta_b > kPi) throw ConfigError(r.key_path("theta_b"), "must lie in [0, pi]");
    if (s.superposition.phi_b < 0.0 || s.superposition.phi_b >= 2.0 * kPi) throw ConfigError(r.key_path("phi_b"), "must lie in [0, 2pi)");
  } else if (type == "coherent") {
    s.kind = InitialState::Kind::Coherent;
    s.alpha = cplx(r.number("re", 0.0), r.number("im", 0.0));
  } else {
    throw ConfigError(r.key_path("type"), "expected fock, superposition or coherent");
  }
  r.finish();
  return s;
}

TargetKind parse_target(const std::string& s, const std::string& path) {
  if (s == "auto") return TargetKind::Auto;
  if (s == "even") return TargetKind::Even;
  if (s == "odd") return TargetKind::Odd;
  if (s == "mixture") return TargetKind::Mixture;
  if (s == "none") return TargetKind::None;
  throw ConfigError(path, "expected auto, even, odd, mixture or none");
}

Integrator parse_integrator(const std::string& s, const std::string& path) {
  if (s == "RK45") return Integrator::RK45;
  if (s == "RK4") return Integrator::RK4;
  throw ConfigError(path, "expected RK45 or RK4");
}

json axis_json(const Axis& a) { return json::array({a.min, a.max, a.n}); }

json optional_mhz(const std::optional<double>& v) { return v ? json(to_mhz(*v)) : json(nullptr); }

}  // namespace

QMatrix InitialState::density(const SpacePtr& space) const {
  const int nq = space->dim_of("qubit");
  const int nm = space->dim_of("magnon");
  if (nq != 2 || space->factors().size() != 2) throw SpaceError("initial states are defined on [qubit, magnon]");
  Vec magnon;
  switch (kind) {
    case Kind::Fock:
      if (n >= nm) throw TruncationError("initial Fock level " + std::to_string(n) + " exceeds the truncation");
      magnon = Vec::Zero(nm);
      magnon(n) = 1.0;
      break;
    case Kind::Superposition:
      if (nm < 2) throw TruncationError("superposition needs at least two magnon levels");
      magnon = superposition.ket(nm);
      break;
    case Kind::Coherent:
      magnon = coherent_state(nm, alpha).data().col(0);
      break;
  }
  Vec q = Vec::Zero(2);
  q(qubit) = 1.0;
  return QMatrix::ket(space, kron(q, magnon)).to_density();
}

Model ScenarioConfig::model() const {
  PhysicalParams p = params;
  p.gamma = rates.gamma;
  p.gamma_phi = rates.gamma_phi;
  p.kappa = rates.kappa;
  Model m = Model::make(p, mismatch);
  if (g_eff) m.derived = with_g_eff(m.derived, *g_eff);
  m.include_detuning = include_detuning;
  return m;
}

std::optional<QMatrix> ScenarioConfig::target_state(const Model& model, int dim) const {
  const cplx alpha = model.derived.alpha;
  TargetKind kind = target;
  if (kind == TargetKind::Auto) {
    switch (initial.kind) {
      case InitialState::Kind::Fock: kind = initial.n % 2 ? TargetKind::Odd : TargetKind::Even; break;
      case InitialState::Kind::Superposition: kind = TargetKind::Mixture; break;
      case InitialState::Kind::Coherent: kind = TargetKind::Even; break;
    }
  }
  switch (kind) {
    case TargetKind::Even: return analytic_cat(dim, CatSpec{alpha, CatParity::Even}).to_density();
    case TargetKind::Odd: return analytic_cat(dim, CatSpec{alpha, CatParity::Odd}).to_density();
    case TargetKind::Mixture: {
      const InitialSuperposition s =
          initial.kind == InitialState::Kind::Superposition ? initial.superposition : InitialSuperposition{kPi / 2.0, kPi / 2.0};
      return predict_steady(s, alpha, dim).mixture;
    }
    default: return std::nullopt;
  }
}

EvolveConfig ScenarioConfig::evolve_config() const {
  const double t_end = time.gamma_t_end / rates.gamma;
  EvolveConfig cfg = EvolveConfig::uniform(t_end, time.points);
  cfg.integrator = time.integrator;
  cfg.rtol = time.rtol;
  cfg.atol = time.atol;
  cfg.dt = time.dt_us;
  for (double gt : outputs.wigner_gamma_t) cfg.snapshot_times.push_back(gt / rates.gamma);
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  Reader r(j, "");
  c.name = r.string("name", c.name);
  r.string("units", "");  // echo annotation, ignored
  const std::string level = r.string("level", to_string(c.level));
  try {
    c.level = parse_level(level);
  } catch (const std::invalid_argument&) {
    throw ConfigError("level", "unknown model level '" + level + "'");
  }
  if (c.level == ModelLevel::ThreeMode || c.level == ModelLevel::JC) {
    throw ConfigError("level", "the " + level + " model has no drive and is not a scenario level");
  }
  c.fock = r.integer("fock", c.fock);
  if (c.fock < 2) throw ConfigError("fock", "needs at least 2 magnon levels");
  if (r.has("params")) read_params(r.child("params"), c.params);
  if (r.has("mismatch")) {
    Reader m = r.child("mismatch");
    c.mismatch.delta13 = m.frequency("delta13", 0.0);
    c.mismatch.deta12 = m.frequency("deta12", 0.0);
    m.finish();
  }
  if (r.has("g_eff")) {
    c.g_eff = r.frequency("g_eff", 0.0);
    if (!(*c.g_eff > 0.0)) throw ConfigError("g_eff", "must be positive");
  }
  c.include_detuning = r.boolean("include_detuning", c.include_detuning);
  if (r.has("rates")) {
    Reader m = r.child("rates");
    c.rates.gamma = m.frequency("gamma", c.rates.gamma);
    c.rates.gamma_phi = m.frequency("gamma_phi", c.rates.gamma_phi);
    c.rates.kappa = m.frequency("kappa", c.rates.kappa);
    m.finish();
    if (!(c.rates.gamma > 0.0)) throw ConfigError("rates.gamma", "must be positive; it sets the time axis");
    if (c.rates.gamma_phi < 0.0) throw ConfigError("rates.gamma_phi", "must be nonnegative");
    if (c.rates.kappa < 0.0) throw ConfigError("rates.kappa", "must be nonnegative");
  }
  if (r.has("initial")) c.initial = read_initial(r.child("initial"));
  c.target = parse_target(r.string("target", "auto"), "target");
  if (r.has("time")) {
    Reader t = r.child("time");
    c.time.gamma_t_end = t.number("gamma_t_end", c.time.gamma_t_end);
    c.time.points = t.integer("points", c.time.points);
    c.time.integrator = parse_integrator(t.string("integrator", to_string(c.time.integrator)), "time.integrator");
    c.time.rtol = t.number("rtol", c.time.rtol);
    c.time.atol = t.number("atol", c.time.atol);
    c.time.dt_us = t.number("dt_us", c.time.dt_us);
    t.finish();
    if (!(c.time.gamma_t_end > 0.0)) throw ConfigError("time.gamma_t_end", "must be positive");
    if (c.time.points < 1) throw ConfigError("time.points", "must be at least 1");
    if (!(c.time.rtol > 0.0)) throw ConfigError("time.rtol", "must be positive");
    if (!(c.time.atol > 0.0)) throw ConfigError("time.atol", "must be positive");
    if (c.time.dt_us < 0.0) throw ConfigError("time.dt_us", "must be nonnegative");
  }
  if (r.has("outputs")) {
    Reader o = r.child("outputs");
    c.outputs.trajectory = o.boolean("trajectory", c.outputs.trajectory);
    c.outputs.wigner_gamma_t = o.numbers("wigner_gamma_t");
    c.outputs.steady = o.boolean("steady", c.outputs.steady);
    c.outputs.re = read_axis(o, "wigner_re", c.outputs.re);
    c.outputs.im = read_axis(o, "wigner_im", c.outputs.im);
    o.finish();
    for (std::size_t i = 0; i < c.outputs.wigner_gamma_t.size(); ++i) {
      const double gt = c.outputs.wigner_gamma_t[i];
      if (gt < 0.0 || gt > c.time.gamma_t_end) {
        throw ConfigError("outputs.wigner_gamma_t[" + std::to_string(i) + "]", "outside [0, time.gamma_t_end]");
      }
      if (i > 0 && gt < c.outputs.wigner_gamma_t[i - 1]) throw ConfigError("outputs.wigner_gamma_t", "must be sorted");
    }
  }
  if (r.has("sweep")) {
    Reader s = r.child("sweep");
    SweepSpec spec;
    spec.axis = s.string("axis", "");
    static const std::set<std::string> axes{"gamma_phi", "kappa", "delta13", "deta12", "g_eff"};
    if (!axes.count(spec.axis)) throw ConfigError("sweep.axis", "expected gamma_phi, kappa, delta13, deta12 or g_eff");
    spec.values = s.numbers("values");
    if (spec.values.empty()) throw ConfigError("sweep.values", "must be a nonempty list");
    spec.hold = s.string("hold", spec.hold);
    if (spec.hold != "eps_p" && spec.hold != "alpha") throw ConfigError("sweep.hold", "expected eps_p or alpha");
    if (spec.hold == "alpha" && spec.axis != "g_eff") throw ConfigError("sweep.hold", "only g_eff sweeps can hold alpha");
    if (spec.axis == "g_eff") {
      for (std::size_t i = 0; i < spec.values.size(); ++i) {
        if (!(spec.values[i] > 0.0)) throw ConfigError("sweep.values[" + std::to_string(i) + "]", "g_eff must be positive");
      }
    }
    if (spec.axis == "gamma_phi" || spec.axis == "kappa") {
      for (std::size_t i = 0; i < spec.values.size(); ++i) {
        if (spec.values[i] < 0.0) throw ConfigError("sweep.values[" + std::to_string(i) + "]", "rates must be nonnegative");
      }
    }
    s.finish();
    c.sweep = spec;
  }
  r.finish();
  try {
    (void)c.model();
  } catch (const std::exception& e) {
    throw ConfigError("params", e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  const auto& p = c.params;
  json j;
  j["name"] = c.name;
  j["level"] = to_string(c.level);
  j["fock"] = c.fock;
  j["units"] = "frequencies and rates in MHz (f = omega / 2pi); phases in rad; time axis gamma_t = gamma * t";
  j["params"] = {{"omega_c", to_mhz(p.omega_c)}, {"omega", to_mhz(p.omega)},   {"omega_q", optional_mhz(p.omega_q)},
                 {"omega_m", optional_mhz(p.omega_m)}, {"g_q", to_mhz(p.g_q)}, {"g_m", to_mhz(p.g_m)},
                 {"eta1", to_mhz(p.eta1)},       {"eta2", to_mhz(p.eta2)},     {"eta3", to_mhz(p.eta3)},
                 {"eps_p", to_mhz(p.eps_p)},     {"omega1", to_mhz(p.omega1)}, {"omega2", optional_mhz(p.omega2)},
                 {"omega3", optional_mhz(p.omega3)}, {"omega_p", optional_mhz(p.omega_p)}, {"phi1", p.phi1},
                 {"phi2", p.phi2},               {"phi3", p.phi3}};
  j["mismatch"] = {{"delta13", to_mhz(c.mismatch.delta13)}, {"deta12", to_mhz(c.mismatch.deta12)}};
  j["g_eff"] = optional_mhz(c.g_eff);
  j["include_detuning"] = c.include_detuning;
  j["rates"] = {{"gamma", to_mhz(c.rates.gamma)}, {"gamma_phi", to_mhz(c.rates.gamma_phi)}, {"kappa", to_mhz(c.rates.kappa)}};
  json init;
  switch (c.initial.kind) {
    case InitialState::Kind::Fock: init = {{"type", "fock"}, {"n", c.initial.n}}; break;
    case InitialState::Kind::Superposition:
      init = {{"type", "superposition"}, {"theta_b", c.initial.superposition.theta_b}, {"phi_b", c.initial.superposition.phi_b}};
      break;
    case InitialState::Kind::Coherent: init = {{"type", "coherent"}, {"re", c.initial.alpha.real()}, {"im", c.initial.alpha.imag()}}; break;
  }
  init["qubit"] = c.initial.qubit ? "up" : "down";
  j["initial"] = init;
  j["target"] = to_string(c.target);
  j["time"] = {{"gamma_t_end", c.time.gamma_t_end}, {"points", c.time.points}, {"integrator", to_string(c.time.integrator)},
               {"rtol", c.time.rtol},               {"atol", c.time.atol},     {"dt_us", c.time.dt_us}};
  j["outputs"] = {{"trajectory", c.outputs.trajectory},
                  {"wigner_gamma_t", c.outputs.wigner_gamma_t},
                  {"steady", c.outputs.steady},
                  {"wigner_re", axis_json(c.outputs.re)},
                  {"wigner_im", axis_json(c.outputs.im)}};
  if (c.sweep) j["sweep"] = {{"axis", c.sweep->axis}, {"values", c.sweep->values}, {"hold", c.sweep->hold}};
  return j;
}

json to_json(const DerivedParams& d) {
  json j;
  auto f = [&](const char* key, double v) { j[key] = to_mhz(v); };
  f("Delta", d.Delta);
  f("omega_M", d.omega_M);
  f("omega_Q", d.omega_Q);
  f("G", d.G);
  f("omega2", d.omega2);
  f("omega3", d.omega3);
  f("Delta_m", d.Delta_m);
  f("Delta_q", d.Delta_q);
  f("Delta_12", d.Delta_12);
  f("Delta_13", d.Delta_13);
  f("delta_z", d.delta_z);
  f("delta_x", d.delta_x);
  j["theta"] = d.theta;
  f("nu", d.nu);
  f("g_x", d.g_x);
  f("g_z", d.g_z);
  f("g_eff", d.g_eff);
  f("stark", d.stark);
  f("omega_p", d.omega_p);
  f("delta_m", d.delta_m);
  f("eps_p", d.eps_p);
  f("eps", d.eps);
  f("eps1", d.eps1);
  f("eps2", d.eps2);
  j["alpha"] = {d.alpha.real(), d.alpha.imag()};
  j["alpha_abs"] = std::abs(d.alpha);
  j["displacement"] = d.displacement;
  j["magnon_flip"] = d.magnon_flip;
  j["units"] = "MHz except theta (rad), alpha and displacement (dimensionless)";
  return j;
}

std::string to_string(Integrator integrator) { return integrator == Integrator::RK4 ? "RK4" : "RK45"; }

std::string to_string(TargetKind target) {
  switch (target) {
    case TargetKind::Auto: return "auto";
    case TargetKind::Even: return "even";
    case TargetKind::Odd: return "odd";
    case TargetKind::Mixture: return "mixture";
    case TargetKind::None: return "none";
  }
  return "auto";
}

}  // namespace magcat
