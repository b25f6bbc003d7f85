#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "magcat/model.hpp"

namespace magcat {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Raised when an integration or steady-state gate fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collapse operator with a rate. Contribution to drho/dt:
/// (rate / 2)(2 L rho L^dag - L^dag L rho - rho L^dag L).
struct LindbladTerm {
  std::string label;
  TaggedOperator op;
  double rate = 0.0;
};

/// Physical rates; term rates are gamma (sigma-), gamma_phi / 2 (sigma_z), kappa (m).
struct Rates {
  double gamma = mhz(16.0);
  double gamma_phi = 0.0;
  double kappa = 0.0;
};

/// Dressed-basis collapse operators on a [qubit, magnon] space. Zero rates are dropped.
std::vector<LindbladTerm> standard_terms(const SpacePtr& space, const Rates& rates);

/// The same physical collapse operators expressed in the frame of `level`.
std::vector<LindbladTerm> dissipators(ModelLevel level, const SpacePtr& space, const Model& model, const Rates& rates);

/// Generator of the master equation, with every operator stored sparse.
class Liouvillian {
 public:
  Liouvillian(const Hamiltonian& h, const std::vector<LindbladTerm>& terms);

  const SpacePtr& space() const { return space_; }
  int dim() const { return dim_; }
  bool time_dependent() const { return !h_td_.empty() || !l_td_.empty(); }
  double fastest_frequency() const { return fastest_; }

  /// out = drho/dt at time t. Valid for non-Hermitian rho.
  void apply(double t, const Mat& rho, Mat& out) const;
  Mat apply(double t, const Mat& rho) const;

  /// Magnon parity of every operator: +1 even, -1 odd, 0 mixed; nullopt if no magnon factor.
  struct Grading {
    int hamiltonian = 1;
    int dissipators = 1;
  };
  const std::optional<Grading>& grading() const { return grading_; }

  /// Sign-flip fault injection for the mutation smoke test.
  void inject_fault_for_testing() { fault_ = true; }

 private:
  struct Component {
    SpMat op;
    std::function<cplx(double)> envelope;
  };
  struct Dissipator {
    double rate = 0.0;
    SpMat l, ladj;
    std::vector<Component> parts;  // time-dependent only
  };

  SpacePtr space_;
  int dim_ = 0;
  double fastest_ = 0.0;
  bool fault_ = false;
  SpMat hc_, hc_adj_;  // constant H - (i/2) sum rate L^dag L
  std::vector<Component> h_td_;
  std::vector<Dissipator> l_const_;
  std::vector<Dissipator> l_td_;
  std::optional<Grading> grading_;
};

enum class Integrator { RK4, RK45 };

struct EvolveConfig {
  double t_end = 0.0;
  std::vector<double> output_times;
  Integrator integrator = Integrator::RK45;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt = 0.0;        // RK4 step; 0 uses the step ceiling
  double max_step = 0.0;  // 0 uses (1/40) 2pi / omega_fastest when time dependent
  double min_step = 1e-13;
  std::vector<double> snapshot_times;
  long long max_steps = 200'000'000;

  void validate() const;
  /// n + 1 evenly spaced output times on [0, t_end].
  static EvolveConfig uniform(double t_end, int n);
};

inline constexpr double kDriftGate = 1e-7;
inline constexpr double kPositivityGate = -1e-6;

struct Diagnostics {
  long long steps = 0;
  long long rejected = 0;
  long long rhs_evals = 0;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  double min_eigenvalue = 1.0;
  bool ok = true;
  std::string message;
};

/// Maps the integrated state into the frame where observables are measured.
using FrameFn = std::function<Mat(double t, const Mat& rho)>;

struct Observer {
  std::optional<QMatrix> target;  // magnon-only target density
  FrameFn frame;                  // identity when empty
  double gamma = mhz(16.0);       // for the dimensionless time axis
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> gamma_t;
  std::vector<double> fidelity;
  std::vector<double> parity;
  std::vector<double> n_mean;
  std::vector<double> var_x1;
  std::vector<double> var_x2;
  std::vector<double> p_excited;
  std::vector<std::pair<double, QMatrix>> snapshots;  // frame-mapped full states
  std::optional<QMatrix> final_state;                 // integration frame
  Diagnostics diagnostics;
};

Trajectory evolve(const QMatrix& rho0, const Liouvillian& generator, const EvolveConfig& cfg, const Observer& observer = {});

/// The observable series <P>(t).
const std::vector<double>& parity_series(const Trajectory& trajectory);
double max_parity_deviation(const Trajectory& trajectory);

/// Basis of the Liouvillian fixed space, split into magnon-parity blocks when the
/// generator respects the grading.
struct FixedSpace {
  std::vector<Mat> states;     // right null vectors, as matrices
  std::vector<Mat> conserved;  // matching left null vectors
  std::vector<int> block;      // block index of each vector
  int blocks = 1;
  double tolerance = 0.0;
};

FixedSpace fixed_space(const Liouvillian& generator, double rel_tol = 1e-9);

/// Unique steady state; throws NumericalError when the fixed space is degenerate.
QMatrix steady_state(const Liouvillian& generator);
/// Asymptotic state reached from rho0, via the conserved quantities.
QMatrix steady_state(const Liouvillian& generator, const QMatrix& rho0);

double trace_distance(const Mat& a, const Mat& b);

}  // namespace magcat
