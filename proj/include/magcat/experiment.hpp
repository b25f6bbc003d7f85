#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "magcat/config.hpp"

namespace magcat {

/// Maximum observable difference between N and 2N truncations accepted by --strict-convergence.
inline constexpr double kConvergenceGate = 1e-4;

struct WignerSnapshot {
  double gamma_t = 0.0;
  WignerGrid grid;
};

struct SteadySummary {
  QMatrix state;   // full steady state in the effective frame
  QMatrix magnon;  // reduced magnon state
  double residual = 0.0;  // max |L rho_ss|
  double fidelity = 0.0;  // Tr[target rho_m] when a target exists
  double normalized_fidelity = 0.0;
  double even_weight = 0.0;
  double odd_weight = 0.0;
  double p_excited = 0.0;
  double recursion_residual = 0.0;  // of the dominant magnon eigenvector
  std::optional<SteadyVerdict> verdict;  // superposition inputs only
  std::optional<WignerGrid> wigner;
  int wigner_dim = 0;  // truncation used for the Wigner grid after zero padding
};

struct RunResult {
  ScenarioConfig config;
  Model model;
  Trajectory trajectory;
  std::vector<WignerSnapshot> wigners;
  std::optional<SteadySummary> steady;
  std::optional<double> convergence_drift;  // set by strict convergence runs
  bool ok() const;
  std::string message() const;
};

struct RunOptions {
  bool trajectory = true;
  bool steady = false;
  bool strict_convergence = false;
};

/// Initial state expressed in the frame of `level` at t = 0.
QMatrix initial_state(const ScenarioConfig& config, const Model& model, const SpacePtr& space);
/// Liouvillian at the scenario's level.
Liouvillian generator(const ScenarioConfig& config, const Model& model, const SpacePtr& space);
/// Observer mapping the integration frame to the effective frame.
Observer observer(const ScenarioConfig& config, const Model& model, const SpacePtr& space);

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Steady state of the effective-level generator reached from the scenario's initial state.
SteadySummary steady_summary(const ScenarioConfig& config, const Model& model, const SpacePtr& space);

/// Zero-pads a magnon density until the Wigner grid passes the tail gate. Throws
/// TruncationError when the state itself reaches the top of its truncation.
QMatrix pad_for_wigner(const QMatrix& rho_m, const Axis& re, const Axis& im);

// ---- sweeps ----

struct SweepRow {
  std::size_t index = 0;
  double value = 0.0;  // MHz
  double max_fidelity = 0.0;
  double argmax_gamma_t = 0.0;
  double final_fidelity = 0.0;
  double alpha_abs = 0.0;
  bool ok = false;
  std::string status;
  Trajectory trajectory;
};

/// Scenario for one grid point of config.sweep.
ScenarioConfig sweep_point(const ScenarioConfig& config, double value);
/// Runs every sweep point; rows come back in axis order regardless of thread count.
std::vector<SweepRow> run_sweep(const ScenarioConfig& config, int threads);

/// Runs fn(0..n-1) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// ---- level ladder ----

struct LadderCheck {
  std::string name;
  double window_gamma_t = 0.0;
  double min_fidelity = 0.0;
  double fidelity_at_end = 0.0;
  double threshold = 0.0;
  bool ok = false;
  std::string note;
};

struct LadderReport {
  LadderCheck rwa_vs_rotating;
  std::vector<LadderCheck> calibrations;  // effective vs RWA1
  std::size_t selected = 0;
  bool target_reached = false;
  std::string discrepancy;
};

struct LadderOptions {
  int fock_rotating = 10;
  int fock_effective = 30;
  double window_rotating = 2.0;
  double window_effective = 45.0;
  int points = 90;
};

LadderReport ladder_comparison(const ScenarioConfig& base, const LadderOptions& options = {});

// ---- fast invariant suite ----

struct ValidationCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

std::vector<ValidationCheck> run_validation(bool inject_fault = false);

}  // namespace magcat
