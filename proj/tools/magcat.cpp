#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "magcat/output.hpp"

#ifndef MAGCAT_PRESET_DIR
#define MAGCAT_PRESET_DIR "presets"
#endif

using namespace magcat;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Common {
  std::string config;
  std::string out;
  int fock = 0;
  std::string level;
  int threads = 1;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (default out/<scenario name>)");
  cmd->add_option("--fock", c.fock, "Magnon truncation N")->check(CLI::Range(2, 400));
  cmd->add_option("--level", c.level, "Model level override, e.g. EFFECTIVE or RWA1");
  cmd->add_option("--threads", c.threads, "Worker threads for sweeps")->check(CLI::Range(1, 256));
  cmd->add_flag("--strict-convergence", c.strict, "Re-run at 2N and fail when observables move by more than 1e-4");
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig cfg = load_config(c.config);
  if (c.fock) cfg.fock = c.fock;
  if (!c.level.empty()) {
    try {
      cfg.level = parse_level(c.level);
    } catch (const std::invalid_argument&) {
      throw ConfigError("--level", "unknown model level '" + c.level + "'");
    }
  }
  return cfg;
}

fs::path out_dir(const Common& c, const ScenarioConfig& cfg) {
  fs::path dir = c.out.empty() ? fs::path("out") / cfg.name : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

std::string wigner_name(double gamma_t) { return "wigner_gt" + format_number(gamma_t) + ".csv"; }

int report_run(const RunResult& r, Manifest& m) {
  m.body()["diagnostics"] = diagnostics_json(r.trajectory.diagnostics);
  if (r.convergence_drift) m.body()["convergence"] = {{"drift", *r.convergence_drift}, {"gate", kConvergenceGate}};
  m.body()["ok"] = r.ok();
  m.write();
  if (!r.ok()) {
    std::cerr << "numerical gate failed: " << r.message() << "\n";
    return kExitNumerical;
  }
  return 0;
}

int cmd_run(const Common& c, bool wigner_only) {
  const ScenarioConfig cfg = resolve(c);
  const fs::path dir = out_dir(c, cfg);
  RunOptions opt;
  opt.strict_convergence = c.strict;
  opt.steady = cfg.outputs.steady && cfg.level == ModelLevel::Effective;
  const RunResult r = run_scenario(cfg, opt);
  Manifest m(dir, cfg, r.model);
  if (!wigner_only && cfg.outputs.trajectory) {
    write_trajectory_csv(dir / "trajectory.csv", r.trajectory);
    m.add_file("trajectory.csv", "trajectory");
  }
  for (const auto& w : r.wigners) {
    write_wigner_csv(dir / wigner_name(w.gamma_t), w.grid);
    m.add_file(wigner_name(w.gamma_t), "wigner");
  }
  m.body()["snapshot_gamma_t"] = cfg.outputs.wigner_gamma_t;
  if (r.steady) {
    m.body()["steady"] = steady_json(*r.steady);
    if (r.steady->wigner) {
      write_wigner_csv(dir / "wigner_steady.csv", *r.steady->wigner);
      m.add_file("wigner_steady.csv", "wigner");
    }
  }
  return report_run(r, m);
}

int cmd_steady(const Common& c) {
  ScenarioConfig cfg = resolve(c);
  cfg.outputs.steady = true;
  const fs::path dir = out_dir(c, cfg);
  const Model model = cfg.model();
  const SteadySummary s = steady_summary(cfg, model, CompositeSpace::qubit_magnon(cfg.fock));
  Manifest m(dir, cfg, model);
  m.body()["steady"] = steady_json(s);
  if (s.wigner) {
    write_wigner_csv(dir / "wigner_steady.csv", *s.wigner);
    m.add_file("wigner_steady.csv", "wigner");
  }
  m.write();
  std::cout << m.body()["steady"].dump(2) << "\n";
  return 0;
}

int cmd_sweep(const Common& c) {
  const ScenarioConfig cfg = resolve(c);
  if (!cfg.sweep) throw ConfigError("sweep", "missing; the sweep subcommand needs a sweep section");
  const fs::path dir = out_dir(c, cfg);
  const auto rows = run_sweep(cfg, c.threads);
  write_sweep_csv(dir / "sweep.csv", cfg.sweep->axis, rows);
  Manifest m(dir, cfg, cfg.model());
  m.add_file("sweep.csv", "sweep");
  json points = json::array();
  bool all_ok = true;
  for (const auto& r : rows) {
    const std::string name = "trajectory_" + std::to_string(r.index) + ".csv";
    if (!r.trajectory.times.empty()) {
      write_trajectory_csv(dir / name, r.trajectory);
      m.add_file(name, "trajectory");
    }
    points.push_back({{"index", r.index}, {"value", r.value}, {"status", r.status}, {"diagnostics", diagnostics_json(r.trajectory.diagnostics)}});
    all_ok = all_ok && r.ok;
  }
  m.body()["points"] = points;
  m.body()["ok"] = all_ok;
  m.write();
  for (const auto& r : rows) {
    std::cout << cfg.sweep->axis << "=" << format_number(r.value) << "  max F " << format_number(r.max_fidelity) << " at gamma t "
              << format_number(r.argmax_gamma_t) << "  final F " << format_number(r.final_fidelity) << "  |alpha| "
              << format_number(r.alpha_abs) << "  " << (r.ok ? "ok" : r.status) << "\n";
  }
  return all_ok ? 0 : kExitNumerical;
}

int cmd_ladder(const Common& c) {
  const ScenarioConfig cfg = resolve(c);
  const fs::path dir = out_dir(c, cfg);
  LadderOptions opt;
  if (c.fock) opt.fock_effective = c.fock;
  const LadderReport rep = ladder_comparison(cfg, opt);
  json j;
  auto check_json = [](const LadderCheck& k) {
    return json{{"name", k.name},           {"window_gamma_t", k.window_gamma_t}, {"min_fidelity", k.min_fidelity},
                {"fidelity_at_end", k.fidelity_at_end}, {"threshold", k.threshold}, {"ok", k.ok}, {"note", k.note}};
  };
  j["rwa_vs_rotating"] = check_json(rep.rwa_vs_rotating);
  j["calibrations"] = json::array();
  for (const auto& k : rep.calibrations) j["calibrations"].push_back(check_json(k));
  j["selected"] = rep.selected;
  j["target_reached"] = rep.target_reached;
  j["discrepancy"] = rep.discrepancy;
  write_text(dir / "ladder.json", j.dump(2) + "\n");
  Manifest m(dir, cfg, cfg.model());
  m.add_file("ladder.json", "ladder");
  m.write();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_validate(bool inject_fault) {
  bool all = true;
  for (const auto& c : run_validation(inject_fault)) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
    all = all && c.ok;
  }
  return all ? 0 : kExitNumerical;
}

int cmd_presets(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const auto cfg = load_config(f.string());
      std::cout << f.stem().string() << "\t" << to_string(cfg.level) << "\t" << f.string() << "\n";
    } catch (const ConfigError& e) {
      std::cout << f.stem().string() << "\tINVALID\t" << e.what() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-magnon-qubit cat-state Lindblad simulator"};
  app.require_subcommand(1);
  Common run_opt, sweep_opt, steady_opt, wigner_opt, ladder_opt;
  auto* run = app.add_subcommand("run", "Integrate one scenario and write trajectory, Wigner snapshots and manifest");
  add_common(run, run_opt);
  auto* sweep = app.add_subcommand("sweep", "Run the scenario's sweep axis");
  add_common(sweep, sweep_opt);
  auto* steady = app.add_subcommand("steady", "Liouvillian steady state reached from the initial state");
  add_common(steady, steady_opt);
  auto* wig = app.add_subcommand("wigner", "Write only the Wigner snapshots of a scenario");
  add_common(wig, wigner_opt);
  auto* ladder = app.add_subcommand("ladder", "Compare adjacent model levels");
  add_common(ladder, ladder_opt);
  bool inject = false;
  auto* validate = app.add_subcommand("validate", "Fast invariant suite");
  validate->add_flag("--inject-fault", inject)->group("");
  std::string preset_dir = MAGCAT_PRESET_DIR;
  auto* presets = app.add_subcommand("presets", "Preset scenarios");
  auto* list = presets->add_subcommand("list", "List preset files");
  list->add_option("--dir", preset_dir, "Preset directory");
  presets->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_opt, false);
    if (*wig) return cmd_run(wigner_opt, true);
    if (*sweep) return cmd_sweep(sweep_opt);
    if (*steady) return cmd_steady(steady_opt);
    if (*ladder) return cmd_ladder(ladder_opt);
    if (*validate) return cmd_validate(inject);
    if (*list) return cmd_presets(preset_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical gate failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const TruncationError& e) {
    std::cerr << "truncation gate failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
