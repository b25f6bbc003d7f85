#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "magcat/hilbert.hpp"

namespace magcat {

/// Converts a frequency quoted as f = omega / 2pi in MHz into rad/us.
constexpr double mhz(double f) { return 2.0 * kPi * f; }
constexpr double to_mhz(double omega) { return omega / (2.0 * kPi); }

/// Bare system and drive parameters. All angular frequencies in rad/us
/// (i.e. 2pi * MHz), phases in radians, time in us.
struct PhysicalParams {
  double omega_c = mhz(8420.0);
  double omega = mhz(8165.9);  // common qubit / magnon frequency
  std::optional<double> omega_q;  // three-mode model only; defaults to omega
  std::optional<double> omega_m;
  double g_q = mhz(121.0);
  double g_m = mhz(21.0);
  double eta1 = mhz(2500.0);
  double eta2 = mhz(50.0);
  double eta3 = mhz(0.75);
  double eps_p = mhz(3.53);
  double omega1 = mhz(8167.335537);  // omega_M - 2pi * 0.3 MHz
  std::optional<double> omega2;  // defaults to omega1 - eta1
  std::optional<double> omega3;  // defaults to omega1
  std::optional<double> omega_p;  // defaults to the dressed splitting nu
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
  double gamma = mhz(16.0);
  double gamma_phi = mhz(16.0);
  double kappa = 0.0;

  void validate() const;
};

/// Drive-frequency and drive-strength mismatches, rad/us.
struct MismatchParams {
  double delta13 = 0.0;  // omega1 - omega3
  double deta12 = 0.0;   // eta1 - (omega1 - omega2)
};

struct DerivedParams {
  double Delta = 0.0;
  double omega_M = 0.0;
  double omega_Q = 0.0;
  double G = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;
  double Delta_m = 0.0;
  double Delta_q = 0.0;
  double Delta_12 = 0.0;
  double Delta_13 = 0.0;
  double delta_z = 0.0;
  double delta_x = 0.0;
  double theta = 0.0;
  double nu = 0.0;
  double g_x = 0.0;
  double g_z = 0.0;
  double g_eff = 0.0;
  double stark = 0.0;  // 8 g_x^2 / (3 nu)
  double omega_p = 0.0;
  double delta_m = 0.0;
  double eps_p = 0.0;
  double eps = 0.0;  // signed modulation amplitude of the Rabi-level drive
  double eps1 = 0.0;
  double eps2 = 0.0;
  cplx alpha{0.0, 0.0};
  double displacement = 0.0;  // -eta3 / (2 (Delta_m - delta13))

  // Dressed-basis geometry in the (x, z) Bloch plane.
  double n_x = 0.0, n_z = 0.0;  // direction of the dressed sigma_z
  double p_x = 0.0, p_z = 0.0;  // direction of the dressed sigma_x
  bool magnon_flip = false;      // dressed frame applies m -> -m
  double dressed_drive_x = 0.0;  // cos(omega_p t) coefficient on dressed sigma_x
  double dressed_drive_z = 0.0;  // ... on dressed sigma_z (zero at theta = pi/4)

  bool operator==(const DerivedParams&) const = default;
};

/// Full derivation chain from bare parameters to effective ones.
DerivedParams derive(const PhysicalParams& params, const MismatchParams& mismatch = {});

/// Replaces g_eff (and alpha) while keeping the rest of the chain.
DerivedParams with_g_eff(DerivedParams d, double g_eff);

/// Parameter set with Delta_m = nu / 2 and eta3 rescaled so delta_x is unchanged.
PhysicalParams resonant_detuning_variant(const PhysicalParams& params);

enum class ModelLevel { ThreeMode, JC, Rotating, RWA1, Rabi, Dressed, Interaction, Effective };

std::string to_string(ModelLevel level);
ModelLevel parse_level(const std::string& name);
bool is_time_dependent(ModelLevel level);

struct Model {
  PhysicalParams params;
  MismatchParams mismatch;
  DerivedParams derived;
  bool include_detuning = false;

  static Model make(const PhysicalParams& params, const MismatchParams& mismatch = {});
};

/// One (constant operator, scalar envelope) pair.
struct Term {
  std::string label;
  Mat op;
  std::function<cplx(double)> envelope;  // empty: constant 1
  double carrier = 0.0;                  // |frequency| of the carrier phase
  double bandwidth = 0.0;                // extra modulation frequency on top of the carrier

  cplx value(double t) const { return envelope ? envelope(t) : cplx(1.0); }
  double max_frequency() const { return carrier + bandwidth; }
};

/// Sum of tagged terms, evaluated at t without rebuilding the operators.
class TaggedOperator {
 public:
  explicit TaggedOperator(SpacePtr space) : space_(std::move(space)) {}

  void add(std::string label, const QMatrix& op, std::function<cplx(double)> envelope = {}, double carrier = 0.0,
           double bandwidth = 0.0);
  void add(Term term);

  const SpacePtr& space() const { return space_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool time_dependent() const;
  double fastest_frequency() const;
  int dim() const { return space_->total_dim(); }

  Mat at(double t) const;
  void at(double t, Mat& out) const;
  QMatrix evaluate(double t) const { return QMatrix(space_, at(t)); }
  const Term* find(const std::string& label) const;

 private:
  SpacePtr space_;
  std::vector<Term> terms_;
};

using Hamiltonian = TaggedOperator;

Hamiltonian build_three_mode(const SpacePtr& space, const Model& model);
Hamiltonian build_jc(const SpacePtr& space, const Model& model);
Hamiltonian build_rotating(const SpacePtr& space, const Model& model);
Hamiltonian build_rwa1(const SpacePtr& space, const Model& model);
Hamiltonian build_rabi(const SpacePtr& space, const Model& model);
Hamiltonian build_dressed(const SpacePtr& space, const Model& model);
Hamiltonian build_interaction(const SpacePtr& space, const Model& model);
Hamiltonian build_effective(const SpacePtr& space, const Model& model);
Hamiltonian build(ModelLevel level, const SpacePtr& space, const Model& model);

/// Qubit rotation taking bare (g, e) amplitudes to dressed (down, up) ones.
Mat dressed_rotation(const DerivedParams& d);

/// Unitary U(t) with rho_to = U rho_from U^dag. Levels sharing a frame map
/// through the identity; the three-mode model only maps to itself.
Mat frame_unitary(ModelLevel from, ModelLevel to, double t, const SpacePtr& space, const Model& model);
QMatrix frame_map(const QMatrix& state, ModelLevel from, ModelLevel to, double t, const Model& model);

/// Time-dependent image U(t) op U(t)^dag of a constant operator, as tagged terms.
TaggedOperator map_operator(const QMatrix& op, ModelLevel from, ModelLevel to, const Model& model);

}  // namespace magcat
