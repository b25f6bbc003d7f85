#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "magcat/analysis.hpp"
#include "magcat/lindblad.hpp"

namespace magcat {

using json = nlohmann::ordered_json;

/// Invalid scenario file; `path` is the offending key path, e.g. "rates.kappa".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Initial state in the effective frame; qubit index 0 is the dressed |down>.
struct InitialState {
  enum class Kind { Fock, Superposition, Coherent };
  Kind kind = Kind::Fock;
  int n = 0;
  InitialSuperposition superposition;
  cplx alpha{0.0, 0.0};
  int qubit = 0;

  QMatrix density(const SpacePtr& space) const;
};

enum class TargetKind { Auto, Even, Odd, Mixture, None };

struct TimeGrid {
  double gamma_t_end = 45.0;
  int points = 450;  // intervals; points + 1 output rows
  Integrator integrator = Integrator::RK45;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_us = 0.0;  // RK4 step, 0 uses the step ceiling
};

struct OutputRequest {
  bool trajectory = true;
  std::vector<double> wigner_gamma_t;
  bool steady = false;
  Axis re;
  Axis im;
};

struct SweepSpec {
  std::string axis;           // gamma_phi | kappa | delta13 | deta12 | g_eff
  std::vector<double> values;  // MHz (f = omega / 2pi)
  std::string hold = "eps_p";  // g_eff sweeps only: eps_p | alpha
};

struct ScenarioConfig {
  std::string name = "scenario";
  ModelLevel level = ModelLevel::Effective;
  int fock = 30;
  PhysicalParams params;
  MismatchParams mismatch;
  std::optional<double> g_eff;  // rad/us; replaces the derived value
  bool include_detuning = false;
  Rates rates{mhz(16.0), 0.0, 0.0};
  InitialState initial;
  TargetKind target = TargetKind::Auto;
  TimeGrid time;
  OutputRequest outputs;
  std::optional<SweepSpec> sweep;

  /// Model with mismatch, g_eff override and detuning flag applied.
  Model model() const;
  /// Magnon-only fidelity target, or nullopt for TargetKind::None.
  std::optional<QMatrix> target_state(const Model& model, int dim) const;
  /// EvolveConfig in microseconds for the requested grid.
  EvolveConfig evolve_config() const;
};

/// Parses and validates a scenario; unknown keys are rejected.
ScenarioConfig parse_config(const json& j);
ScenarioConfig load_config(const std::string& path);

/// Fully resolved configuration, every physical number included (frequencies in MHz).
json to_json(const ScenarioConfig& c);
json to_json(const DerivedParams& d);

std::string to_string(Integrator integrator);
std::string to_string(TargetKind target);

}  // namespace magcat
