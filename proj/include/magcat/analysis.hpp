#pragma once

#include <string>
#include <vector>

#include "magcat/hilbert.hpp"

namespace magcat {

// ---- fidelities ----

/// Hilbert-Schmidt overlap Tr[target rho]. Equals the usual fidelity only for a pure target.
double fidelity_overlap(const QMatrix& target, const QMatrix& rho);
/// Tr[a b] / max(Tr[a^2], Tr[b^2]).
double normalized_overlap(const QMatrix& a, const QMatrix& b);
/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double uhlmann_fidelity(const Mat& a, const Mat& b);

// ---- cats ----

enum class CatParity { Even, Odd };

struct CatSpec {
  cplx alpha{0.0, 0.0};
  CatParity parity = CatParity::Even;
  /// [2(1 +- exp(-2|alpha|^2))]^{-1/2}
  double normalization() const;
};

/// Parity-projected coherent superposition on a single "magnon" factor.
/// The alpha -> 0 limits are |0> (even) and |1> (odd).
QMatrix analytic_cat(int dim, const CatSpec& spec);

/// max_n |c_{n+2} sqrt((n+1)(n+2)) - alpha^2 c_n| over the truncated support.
double recursion_check(const Vec& ket, cplx alpha);
/// Dominant eigenvector of a magnon density, phase-fixed.
Vec dominant_ket(const Mat& rho);

// ---- Wigner ----

struct Axis {
  double min = -3.0;
  double max = 3.0;
  int n = 121;
  double at(int i) const { return n == 1 ? min : min + (max - min) * i / (n - 1); }
  double step() const { return n == 1 ? 0.0 : (max - min) / (n - 1); }
};

/// W(beta) on a rectangular grid; values(i, j) has Im index i (row) and Re index j (column).
struct WignerGrid {
  Axis re;
  Axis im;
  Eigen::MatrixXd values;

  double integral() const;
  double max_abs() const;
  /// Evaluates at the nearest grid point.
  double nearest(cplx beta) const;
};

/// Upper bound on |beta| that the tail gate must cover for this grid.
double grid_extent(const Axis& re, const Axis& im);

/// W(beta) = (2/pi) Tr[D(beta)^dag rho D(beta) P] on one magnon factor. Throws
/// TruncationError when dim cannot hold a coherent state at the grid's largest |beta|.
WignerGrid wigner(const QMatrix& rho_m, const Axis& re, const Axis& im);
double wigner_at(const Mat& rho_m, cplx beta);

/// Local maxima of W above `threshold` * max W, sorted by decreasing value.
std::vector<cplx> wigner_peaks(const WignerGrid& grid, double threshold = 0.5);

/// Fringe verdict: max |W| on Re beta = 0, |Im beta| <= 1 below 5% of the global max.
struct FringeVerdict {
  double segment_max = 0.0;
  double grid_max = 0.0;
  bool cancelled = false;
};
inline constexpr double kFringeThreshold = 0.05;
FringeVerdict fringe_verdict(const QMatrix& rho_m, const Axis& re = {}, const Axis& im = {});

// ---- superposition initial states ----

struct InitialSuperposition {
  double theta_b = 0.0;  // [0, pi]
  double phi_b = 0.0;    // [0, 2pi)
  cplx a() const;
  cplx b() const;
  /// cos(theta_b/2)|0> + sin(theta_b/2) e^{i phi_b}|1>
  Vec ket(int dim) const;
};

struct SteadyPrediction {
  QMatrix coherent;  // a, b weighted superposition including the cross terms
  QMatrix mixture;   // cross terms dropped
  double even_weight = 0.0;
  double odd_weight = 0.0;
};

SteadyPrediction predict_steady(const InitialSuperposition& init, cplx alpha, int dim);

/// Which candidate a computed steady magnon state is closer to (trace distance).
struct SteadyVerdict {
  double distance_coherent = 0.0;
  double distance_mixture = 0.0;
  std::string closer;  // "coherent" or "mixture"
  FringeVerdict fringes;
};
SteadyVerdict classify_steady(const SteadyPrediction& prediction, const QMatrix& rho_m);

// ---- quadratures ----

struct QuadratureStats {
  double var_x1 = 0.0;
  double var_x2 = 0.0;
  double mean_x1 = 0.0;
  double mean_x2 = 0.0;
};
/// X1 = (m + m^dag)/sqrt2, X2 = i(m^dag - m)/sqrt2; vacuum variance 1/2.
QuadratureStats quadrature_stats(const QMatrix& rho_m);

}  // namespace magcat
