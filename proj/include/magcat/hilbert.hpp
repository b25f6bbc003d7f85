#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace magcat {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Thrown when operands live on different composite spaces or a factor is missing.
class SpaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a Fock truncation cannot hold the requested state.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a QMatrix violates the invariants of its kind.
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Factor {
  std::string label;
  int dim = 0;
  bool operator==(const Factor&) const = default;
};

/// Ordered tensor-product layout. Index mapping is row-major over the factors,
/// so the last factor varies fastest.
class CompositeSpace {
 public:
  explicit CompositeSpace(std::vector<Factor> factors);

  /// ["qubit"(2), "magnon"(n)]
  static std::shared_ptr<const CompositeSpace> qubit_magnon(int magnon_dim);
  /// ["cavity"(nc), "qubit"(2), "magnon"(n)]
  static std::shared_ptr<const CompositeSpace> cavity_qubit_magnon(int cavity_dim, int magnon_dim);
  /// A single factor, e.g. ["magnon"(n)].
  static std::shared_ptr<const CompositeSpace> single(const std::string& label, int dim);

  const std::vector<Factor>& factors() const { return factors_; }
  int total_dim() const { return total_; }
  int dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }
  bool has(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;
  /// Product of the dims of the factors after position `i`.
  int stride(std::size_t i) const;

  bool operator==(const CompositeSpace& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  int total_ = 1;
};

using SpacePtr = std::shared_ptr<const CompositeSpace>;

enum class Kind { Operator, Ket, Density };

/// Dense complex operator, ket, or density matrix tied to one composite space.
class QMatrix {
 public:
  QMatrix(SpacePtr space, Mat data, Kind kind = Kind::Operator);

  /// Builds a ket and checks unit norm.
  static QMatrix ket(SpacePtr space, Vec amplitudes);
  /// Builds a density matrix and checks Hermiticity, unit trace and positivity.
  static QMatrix density(SpacePtr space, Mat rho);
  static QMatrix identity(SpacePtr space);
  static QMatrix zero(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  const Mat& data() const { return data_; }
  Kind kind() const { return kind_; }
  int dim() const { return space_->total_dim(); }

  /// |psi><psi| for kets, the matrix itself otherwise.
  QMatrix to_density() const;
  QMatrix adjoint() const;
  bool is_hermitian(double tol = 1e-10) const;
  void check_invariants() const;

  QMatrix operator+(const QMatrix& other) const;
  QMatrix operator-(const QMatrix& other) const;
  QMatrix operator*(const QMatrix& other) const;
  QMatrix operator*(cplx s) const;
  friend QMatrix operator*(cplx s, const QMatrix& m) { return m * s; }

 private:
  void require_same_space(const QMatrix& other) const;

  SpacePtr space_;
  Mat data_;
  Kind kind_;
};

QMatrix commutator(const QMatrix& a, const QMatrix& b);

// ---- local (single-factor) matrices ----

Mat local_annihilation(int dim);
Mat local_number(int dim);
Mat local_parity(int dim);

/// Embeds `local` on factor `label`, identity elsewhere.
QMatrix embed(const SpacePtr& space, const std::string& label, const Mat& local);
/// Joint embedding of several local operators acting on distinct factors.
QMatrix embed_many(const SpacePtr& space, const std::vector<std::pair<std::string, Mat>>& locals);

QMatrix annihilation(const SpacePtr& space, const std::string& label);
QMatrix number(const SpacePtr& space, const std::string& label);

struct QubitOps {
  QMatrix sz;
  QMatrix sp;
  QMatrix sm;
  QMatrix sx;
};

/// Pauli set on the "qubit" factor; index 0 is the ground (or lower dressed) state.
QubitOps qubit_ops(const SpacePtr& space);

/// Poisson tail mass sum_{n >= dim} |<n|alpha>|^2 of an untruncated coherent state.
double coherent_tail(int dim, cplx alpha);

inline constexpr double kTailGate = 1e-8;

/// Truncated, renormalized coherent state on a single "magnon" factor.
QMatrix coherent_state(int dim, cplx alpha);
QMatrix coherent_state(const SpacePtr& space, const std::string& label, cplx alpha);
QMatrix fock_state(const SpacePtr& space, const std::vector<int>& occupation);

/// exp(beta a^dag - beta^* a) on the truncated space.
Mat displacement_matrix(int dim, cplx beta);
QMatrix displacement(int dim, cplx beta);

QMatrix parity(int dim);

/// Reduced density matrix on `keep`.
QMatrix partial_trace(const QMatrix& rho, const std::string& keep);

cplx expectation(const QMatrix& state, const QMatrix& op);
double variance(const QMatrix& state, const QMatrix& op);

/// Smallest eigenvalue of the Hermitian part of `rho`.
double min_eigenvalue(const Mat& rho);

/// Kronecker product with the left operand as the slow index.
Mat kron(const Mat& a, const Mat& b);

}  // namespace magcat
