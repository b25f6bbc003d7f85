#include "magcat/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace magcat {

namespace {

Mat magnon_of(const SpacePtr& space, const Mat& rho) { return partial_trace(QMatrix(space, rho), "magnon").data(); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    if (std::isnan(a[k]) && std::isnan(b[k])) continue;
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

}  // namespace

bool RunResult::ok() const {
  if (!trajectory.diagnostics.ok) return false;
  return !convergence_drift || *convergence_drift <= kConvergenceGate;
}

std::string RunResult::message() const {
  std::string m = trajectory.diagnostics.message;
  if (convergence_drift && *convergence_drift > kConvergenceGate) {
    m += "observables moved by " + fmt(*convergence_drift) + " between N and 2N truncation; ";
  }
  return m;
}

QMatrix initial_state(const ScenarioConfig& config, const Model& model, const SpacePtr& space) {
  const QMatrix rho = config.initial.density(space);
  if (config.level == ModelLevel::Effective) return rho;
  return frame_map(rho, ModelLevel::Effective, config.level, 0.0, model);
}

Liouvillian generator(const ScenarioConfig& config, const Model& model, const SpacePtr& space) {
  return Liouvillian(build(config.level, space, model), dissipators(config.level, space, model, config.rates));
}

Observer observer(const ScenarioConfig& config, const Model& model, const SpacePtr& space) {
  Observer obs;
  obs.target = config.target_state(model, space->dim_of("magnon"));
  obs.gamma = config.rates.gamma;
  if (config.level != ModelLevel::Effective && config.level != ModelLevel::Interaction) {
    const ModelLevel level = config.level;
    obs.frame = [level, model, space](double t, const Mat& rho) {
      const Mat u = frame_unitary(level, ModelLevel::Effective, t, space, model);
      return Mat(u * rho * u.adjoint());
    };
  }
  return obs;
}

QMatrix pad_for_wigner(const QMatrix& rho_m, const Axis& re, const Axis& im) {
  const double extent = grid_extent(re, im);
  const int n = rho_m.dim();
  int dim = n;
  while (coherent_tail(dim, extent) > kTailGate) {
    if (++dim > 400) throw TruncationError("no truncation below 400 levels passes the tail gate for this grid");
  }
  if (dim == n) return rho_m;
  const int top = std::max(2, n / 6);
  double tail = 0.0;
  for (int k = n - top; k < n; ++k) tail += rho_m.data()(k, k).real();
  if (tail > 1e-10) {
    throw TruncationError("state occupies the top of its " + std::to_string(n) + "-level truncation (population " + fmt(tail) +
                          "); rerun with a larger --fock");
  }
  Mat padded = Mat::Zero(dim, dim);
  padded.topLeftCorner(n, n) = rho_m.data();
  return QMatrix::density(CompositeSpace::single("magnon", dim), padded);
}

SteadySummary steady_summary(const ScenarioConfig& config, const Model& model, const SpacePtr& space) {
  if (config.level != ModelLevel::Effective) {
    throw ConfigError("level", "steady states are computed for the time-independent EFFECTIVE level");
  }
  const Liouvillian gen = generator(config, model, space);
  const QMatrix ss = steady_state(gen, initial_state(config, model, space));
  const int n = space->dim_of("magnon");
  SteadySummary s{ss, partial_trace(ss, "magnon"), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, std::nullopt, std::nullopt, 0};
  s.residual = gen.apply(0.0, ss.data()).cwiseAbs().maxCoeff();
  const auto& rm = s.magnon.data();
  for (int k = 0; k < n; ++k) (k % 2 ? s.odd_weight : s.even_weight) += rm(k, k).real();
  const auto q = qubit_ops(space);
  s.p_excited = expectation(ss, q.sp * q.sm).real();
  s.recursion_residual = recursion_check(dominant_ket(rm), model.derived.alpha);
  if (auto target = config.target_state(model, n)) {
    s.fidelity = fidelity_overlap(*target, s.magnon);
    s.normalized_fidelity = normalized_overlap(*target, s.magnon);
  }
  if (config.outputs.steady || config.initial.kind == InitialState::Kind::Superposition) {
    const QMatrix padded = pad_for_wigner(s.magnon, config.outputs.re, config.outputs.im);
    s.wigner_dim = padded.dim();
    s.wigner = wigner(padded, config.outputs.re, config.outputs.im);
    if (config.initial.kind == InitialState::Kind::Superposition) {
      const QMatrix fringe_ready = pad_for_wigner(s.magnon, Axis{}, Axis{});
      const auto prediction = predict_steady(config.initial.superposition, model.derived.alpha, fringe_ready.dim());
      s.verdict = classify_steady(prediction, fringe_ready);
    }
  }
  return s;
}

namespace {

// labels a snapshot with the configured value rather than gamma * t
double requested_gamma_t(const ScenarioConfig& config, double t_us) {
  const double gt = config.rates.gamma * t_us;
  double best = gt;
  for (double want : config.outputs.wigner_gamma_t) {
    if (std::abs(want - gt) < std::abs(best - gt) || best == gt) best = want;
  }
  return std::abs(best - gt) <= 1e-9 * std::max(1.0, std::abs(gt)) ? best : gt;
}

// uniform grid rows carry gamma_t = gamma_t_end * k / points exactly
void exact_gamma_t(const ScenarioConfig& config, Trajectory& t) {
  if (t.gamma_t.size() != static_cast<std::size_t>(config.time.points) + 1) return;
  for (std::size_t k = 0; k < t.gamma_t.size(); ++k) {
    t.gamma_t[k] = config.time.gamma_t_end * static_cast<double>(k) / config.time.points;
  }
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  RunResult r{config, config.model(), {}, {}, std::nullopt, std::nullopt};
  const auto space = CompositeSpace::qubit_magnon(config.fock);
  if (options.trajectory) {
    const Liouvillian gen = generator(config, r.model, space);
    const Observer obs = observer(config, r.model, space);
    r.trajectory = evolve(initial_state(config, r.model, space), gen, config.evolve_config(), obs);
    exact_gamma_t(config, r.trajectory);
    for (const auto& [t, state] : r.trajectory.snapshots) {
      const QMatrix rm = pad_for_wigner(QMatrix(CompositeSpace::single("magnon", config.fock), magnon_of(space, state.data()),
                                                Kind::Density),
                                        config.outputs.re, config.outputs.im);
      r.wigners.push_back({requested_gamma_t(config, t), wigner(rm, config.outputs.re, config.outputs.im)});
    }
    if (options.strict_convergence) {
      ScenarioConfig fine = config;
      fine.fock = 2 * config.fock;
      fine.outputs.wigner_gamma_t.clear();
      const auto fine_space = CompositeSpace::qubit_magnon(fine.fock);
      const Trajectory t2 = evolve(initial_state(fine, r.model, fine_space), generator(fine, r.model, fine_space),
                                   fine.evolve_config(), observer(fine, r.model, fine_space));
      const auto& a = r.trajectory;
      double drift = 0.0;
      drift = std::max(drift, max_abs_diff(a.fidelity, t2.fidelity));
      drift = std::max(drift, max_abs_diff(a.parity, t2.parity));
      drift = std::max(drift, max_abs_diff(a.n_mean, t2.n_mean));
      drift = std::max(drift, max_abs_diff(a.var_x1, t2.var_x1));
      drift = std::max(drift, max_abs_diff(a.var_x2, t2.var_x2));
      drift = std::max(drift, max_abs_diff(a.p_excited, t2.p_excited));
      r.convergence_drift = drift;
    }
  }
  if (options.steady) r.steady = steady_summary(config, r.model, space);
  return r;
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ScenarioConfig sweep_point(const ScenarioConfig& config, double value) {
  if (!config.sweep) throw ConfigError("sweep", "scenario has no sweep section");
  ScenarioConfig c = config;
  c.sweep.reset();
  const std::string& axis = config.sweep->axis;
  c.name = config.name + "/" + axis + "=" + fmt(value, 10);
  if (axis == "gamma_phi") {
    c.rates.gamma_phi = mhz(value);
  } else if (axis == "kappa") {
    c.rates.kappa = mhz(value);
  } else if (axis == "delta13") {
    c.mismatch.delta13 = mhz(value);
  } else if (axis == "deta12") {
    c.mismatch.deta12 = mhz(value);
  } else if (axis == "g_eff") {
    if (config.sweep->hold == "alpha") {
      const double a2 = std::norm(config.model().derived.alpha);
      c.params.eps_p = a2 * mhz(value);
    }
    c.g_eff = mhz(value);
  } else {
    throw ConfigError("sweep.axis", "unknown axis " + axis);
  }
  return c;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& config, int threads) {
  if (!config.sweep) throw ConfigError("sweep", "scenario has no sweep section");
  const auto& values = config.sweep->values;
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.index = i;
    row.value = values[i];
    try {
      const ScenarioConfig point = sweep_point(config, values[i]);
      RunResult r = run_scenario(point, RunOptions{});
      const auto& f = r.trajectory.fidelity;
      row.alpha_abs = std::abs(r.model.derived.alpha);
      if (!f.empty()) {
        const auto best = std::max_element(f.begin(), f.end());
        row.max_fidelity = *best;
        row.argmax_gamma_t = r.trajectory.gamma_t[static_cast<std::size_t>(best - f.begin())];
        row.final_fidelity = f.back();
      }
      row.ok = r.ok();
      row.status = row.ok ? "ok" : r.message();
      row.trajectory = std::move(r.trajectory);
    } catch (const std::exception& e) {
      row.ok = false;
      row.status = e.what();
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

/// Full states at every output time, in the frame of `to` when given.
std::vector<Mat> states_on_grid(const ScenarioConfig& config, const Model& model, const SpacePtr& space, double gamma_t_end,
                                int points, std::optional<ModelLevel> to) {
  EvolveConfig cfg = EvolveConfig::uniform(gamma_t_end / config.rates.gamma, points);
  cfg.snapshot_times = cfg.output_times;
  cfg.rtol = config.time.rtol;
  cfg.atol = config.time.atol;
  Observer obs;
  obs.gamma = config.rates.gamma;
  if (to && *to != config.level) {
    const ModelLevel from = config.level, target = *to;
    obs.frame = [from, target, model, space](double t, const Mat& rho) {
      const Mat u = frame_unitary(from, target, t, space, model);
      return Mat(u * rho * u.adjoint());
    };
  }
  const Trajectory tr =
      evolve(initial_state(config, model, space), Liouvillian(build(config.level, space, model),
                                                              dissipators(config.level, space, model, config.rates)),
             cfg, obs);
  if (!tr.diagnostics.ok) throw NumericalError(to_string(config.level) + " run failed: " + tr.diagnostics.message);
  std::vector<Mat> out;
  for (const auto& [t, s] : tr.snapshots) out.push_back(s.data());
  return out;
}

LadderCheck compare(const std::string& name, const std::vector<Mat>& a, const std::vector<Mat>& b, double window,
                    double threshold) {
  LadderCheck c{name, window, 0.0, 0.0, 0.0, false, {}};
  c.threshold = threshold;
  c.min_fidelity = 1.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    const double f = uhlmann_fidelity(a[k], b[k]);
    c.min_fidelity = std::min(c.min_fidelity, f);
    c.fidelity_at_end = f;
  }
  c.ok = c.min_fidelity >= threshold;
  return c;
}

}  // namespace

LadderReport ladder_comparison(const ScenarioConfig& base, const LadderOptions& options) {
  LadderReport report;
  {
    ScenarioConfig c = base;
    c.fock = options.fock_rotating;
    c.level = ModelLevel::RWA1;
    const Model model = c.model();
    const auto space = CompositeSpace::qubit_magnon(c.fock);
    const auto rwa = states_on_grid(c, model, space, options.window_rotating, options.points, std::nullopt);
    c.level = ModelLevel::Rotating;
    const auto rot = states_on_grid(c, model, space, options.window_rotating, options.points, std::nullopt);
    report.rwa_vs_rotating = compare("RWA1 vs ROTATING (full state)", rwa, rot, options.window_rotating, 0.99);
  }

  struct Variant {
    std::string name;
    PhysicalParams params;
  };
  const std::vector<Variant> variants{{"quoted Delta_m", base.params}, {"Delta_m = nu/2", resonant_detuning_variant(base.params)}};
  const auto space = CompositeSpace::qubit_magnon(options.fock_effective);
  for (const auto& v : variants) {
    ScenarioConfig c = base;
    c.params = v.params;
    c.fock = options.fock_effective;
    c.level = ModelLevel::RWA1;
    const Model rwa_model = c.model();
    std::vector<Mat> rwa;
    for (const auto& s : states_on_grid(c, rwa_model, space, options.window_effective, options.points, ModelLevel::Effective)) {
      rwa.push_back(magnon_of(space, s));
    }
    for (bool detuning : {false, true}) {
      ScenarioConfig e = c;
      e.level = ModelLevel::Effective;
      e.include_detuning = detuning;
      const Model eff_model = e.model();
      std::vector<Mat> eff;
      for (const auto& s : states_on_grid(e, eff_model, space, options.window_effective, options.points, std::nullopt)) {
        eff.push_back(magnon_of(space, s));
      }
      auto check = compare("EFFECTIVE vs RWA1 (magnon), " + v.name + (detuning ? ", with delta_m term" : ", without delta_m term"),
                           eff, rwa, options.window_effective, 0.9);
      check.note = "delta_m/2pi = " + fmt(to_mhz(eff_model.derived.delta_m)) + " MHz";
      report.calibrations.push_back(check);
    }
  }
  for (std::size_t i = 0; i < report.calibrations.size(); ++i) {
    if (report.calibrations[i].min_fidelity > report.calibrations[report.selected].min_fidelity) report.selected = i;
  }
  const auto& best = report.calibrations[report.selected];
  report.target_reached = best.ok;
  std::ostringstream d;
  if (report.target_reached) {
    d << "calibration '" << best.name << "' keeps F >= 0.9 for gamma t <= " << best.window_gamma_t << " (min " << fmt(best.min_fidelity)
      << ")";
  } else {
    d << "no calibration reaches F >= 0.9 over gamma t <= " << best.window_gamma_t << "; best is '" << best.name << "' with min F "
      << fmt(best.min_fidelity) << ". Per configuration:";
    for (const auto& c : report.calibrations) d << " [" << c.name << ": min " << fmt(c.min_fidelity) << ", end " << fmt(c.fidelity_at_end) << "]";
  }
  report.discrepancy = d.str();
  return report;
}

// ---------------------------------------------------------------------------

std::vector<ValidationCheck> run_validation(bool inject_fault) {
  std::vector<ValidationCheck> out;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      out.push_back({name, ok, detail});
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  check("hilbert: [a, a^dag] = 1 below the truncation edge", [] {
    const Mat a = local_annihilation(12);
    const Mat c = a * a.adjoint() - a.adjoint() * a;
    const double err = (c.topLeftCorner(11, 11) - Mat::Identity(11, 11)).cwiseAbs().maxCoeff();
    return std::pair{err < 1e-12, "max deviation " + fmt(err)};
  });

  check("hilbert: D(beta)|0> is the coherent state", [] {
    const double f = std::norm(coherent_state(40, cplx(1.1, -0.6)).data().col(0).dot(displacement(40, cplx(1.1, -0.6)).data().col(0)));
    return std::pair{f > 1.0 - 1e-8, "overlap " + fmt(f, 12)};
  });

  check("hilbert: tail gate rejects N = 6 at alpha = 1.58", [] {
    try {
      (void)coherent_state(6, 1.58);
    } catch (const TruncationError& e) {
      return std::pair{true, std::string("rejected: ") + e.what()};
    }
    return std::pair{false, std::string("N = 6 was accepted")};
  });

  check("model: every builder is Hermitian", [] {
    const auto model = Model::make(PhysicalParams{});
    const auto space = CompositeSpace::qubit_magnon(6);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (ModelLevel level : {ModelLevel::JC, ModelLevel::Rotating, ModelLevel::RWA1, ModelLevel::Rabi, ModelLevel::Dressed,
                             ModelLevel::Interaction, ModelLevel::Effective}) {
      const auto h = build(level, space, model);
      for (int k = 0; k < 20; ++k) {
        const Mat m = h.at(u(rng));
        worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff() / std::max(1.0, m.cwiseAbs().maxCoeff()));
      }
    }
    return std::pair{worst < 1e-10, "max relative anti-Hermitian part " + fmt(worst)};
  });

  check("engine: free qubit decay follows exp(-gamma t)", [inject_fault] {
    const auto space = CompositeSpace::qubit_magnon(2);
    const double gamma = mhz(16.0);
    Liouvillian gen(Hamiltonian(space), standard_terms(space, Rates{gamma, 0.0, 0.0}));
    if (inject_fault) gen.inject_fault_for_testing();
    auto cfg = EvolveConfig::uniform(5.0 / gamma, 25);
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    Vec e = Vec::Zero(4);
    e(2) = 1.0;
    const auto tr = evolve(QMatrix::ket(space, e).to_density(), gen, cfg, Observer{std::nullopt, {}, gamma});
    double err = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) err = std::max(err, std::abs(tr.p_excited[k] - std::exp(-gamma * tr.times[k])));
    return std::pair{err < 1e-6 && tr.diagnostics.ok, "max error " + fmt(err) + (tr.diagnostics.ok ? "" : "; " + tr.diagnostics.message)};
  });

  check("oracle: analytic cats satisfy the two-step recursion", [] {
    double worst = 0.0;
    for (double a : {0.5, 1.0, 1.582, 2.0}) {
      for (CatParity p : {CatParity::Even, CatParity::Odd}) {
        worst = std::max(worst, recursion_check(analytic_cat(40, CatSpec{a, p}).data().col(0), a));
      }
    }
    return std::pair{worst < 1e-10, "max residual " + fmt(worst)};
  });

  check("engine: magnon parity conserved without magnon loss", [] {
    auto model = Model::make(PhysicalParams{});
    const auto space = CompositeSpace::qubit_magnon(16);
    const Rates rates{mhz(16.0), mhz(16.0), 0.0};
    const Liouvillian gen(build_effective(space, model), dissipators(ModelLevel::Effective, space, model, rates));
    Vec v = Vec::Zero(32);
    v(0) = 1.0;
    const auto tr = evolve(QMatrix::ket(space, v).to_density(), gen, EvolveConfig::uniform(5.0 / rates.gamma, 10));
    const double dev = max_parity_deviation(tr);
    return std::pair{dev < 1e-6, "max |<P>(t) - <P>(0)| = " + fmt(dev)};
  });
  return out;
}

}  // namespace magcat
