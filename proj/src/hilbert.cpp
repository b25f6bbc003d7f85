#include "magcat/hilbert.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace magcat {

CompositeSpace::CompositeSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw SpaceError("composite space needs at least one factor");
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].dim < 1) throw SpaceError("factor '" + factors_[i].label + "' has non-positive dimension");
    for (std::size_t j = 0; j < i; ++j) {
      if (factors_[j].label == factors_[i].label) throw SpaceError("duplicate factor label '" + factors_[i].label + "'");
    }
    total_ *= factors_[i].dim;
  }
}

SpacePtr CompositeSpace::qubit_magnon(int magnon_dim) {
  return std::make_shared<const CompositeSpace>(std::vector<Factor>{{"qubit", 2}, {"magnon", magnon_dim}});
}

SpacePtr CompositeSpace::cavity_qubit_magnon(int cavity_dim, int magnon_dim) {
  return std::make_shared<const CompositeSpace>(
      std::vector<Factor>{{"cavity", cavity_dim}, {"qubit", 2}, {"magnon", magnon_dim}});
}

SpacePtr CompositeSpace::single(const std::string& label, int dim) {
  return std::make_shared<const CompositeSpace>(std::vector<Factor>{{label, dim}});
}

bool CompositeSpace::has(const std::string& label) const {
  for (const auto& f : factors_) {
    if (f.label == label) return true;
  }
  return false;
}

std::size_t CompositeSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw SpaceError("unknown factor label '" + label + "'");
}

int CompositeSpace::stride(std::size_t i) const {
  int s = 1;
  for (std::size_t j = i + 1; j < factors_.size(); ++j) s *= factors_[j].dim;
  return s;
}

// ---------------------------------------------------------------------------

QMatrix::QMatrix(SpacePtr space, Mat data, Kind kind) : space_(std::move(space)), data_(std::move(data)), kind_(kind) {
  if (!space_) throw SpaceError("QMatrix requires a space");
  const int n = space_->total_dim();
  const int cols = kind_ == Kind::Ket ? 1 : n;
  if (data_.rows() != n || data_.cols() != cols) {
    std::ostringstream os;
    os << "matrix shape " << data_.rows() << "x" << data_.cols() << " does not match space dimension " << n;
    throw SpaceError(os.str());
  }
}

QMatrix QMatrix::ket(SpacePtr space, Vec amplitudes) {
  QMatrix q(std::move(space), Mat(std::move(amplitudes)), Kind::Ket);
  q.check_invariants();
  return q;
}

QMatrix QMatrix::density(SpacePtr space, Mat rho) {
  QMatrix q(std::move(space), std::move(rho), Kind::Density);
  q.check_invariants();
  return q;
}

QMatrix QMatrix::identity(SpacePtr space) {
  const int n = space->total_dim();
  return QMatrix(std::move(space), Mat::Identity(n, n));
}

QMatrix QMatrix::zero(SpacePtr space) {
  const int n = space->total_dim();
  return QMatrix(std::move(space), Mat::Zero(n, n));
}

QMatrix QMatrix::to_density() const {
  if (kind_ == Kind::Ket) return QMatrix(space_, data_ * data_.adjoint(), Kind::Density);
  return QMatrix(space_, data_, Kind::Density);
}

QMatrix QMatrix::adjoint() const {
  if (kind_ == Kind::Ket) throw InvariantError("adjoint of a ket is not a QMatrix");
  return QMatrix(space_, data_.adjoint(), kind_);
}

bool QMatrix::is_hermitian(double tol) const {
  if (kind_ == Kind::Ket) return false;
  return (data_ - data_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void QMatrix::check_invariants() const {
  switch (kind_) {
    case Kind::Operator:
      return;
    case Kind::Ket: {
      const double norm = data_.norm();
      if (std::abs(norm - 1.0) > 1e-10) throw InvariantError("ket norm " + std::to_string(norm) + " is not 1");
      return;
    }
    case Kind::Density: {
      if (!is_hermitian(1e-10)) throw InvariantError("density matrix is not Hermitian");
      const cplx tr = data_.trace();
      if (std::abs(tr - 1.0) > 1e-10) throw InvariantError("density matrix trace is not 1");
      if (min_eigenvalue(data_) < -1e-8) throw InvariantError("density matrix has a negative eigenvalue");
      return;
    }
  }
}

void QMatrix::require_same_space(const QMatrix& other) const {
  if (space_ != other.space_ && !(*space_ == *other.space_)) throw SpaceError("operands live on different spaces");
  if (kind_ == Kind::Ket || other.kind_ == Kind::Ket) throw SpaceError("operator arithmetic on kets is not defined");
}

QMatrix QMatrix::operator+(const QMatrix& other) const {
  require_same_space(other);
  return QMatrix(space_, data_ + other.data_);
}

QMatrix QMatrix::operator-(const QMatrix& other) const {
  require_same_space(other);
  return QMatrix(space_, data_ - other.data_);
}

QMatrix QMatrix::operator*(const QMatrix& other) const {
  if (space_ != other.space_ && !(*space_ == *other.space_)) throw SpaceError("operands live on different spaces");
  if (kind_ == Kind::Ket) throw SpaceError("a ket cannot be the left operand of a product");
  if (other.kind_ == Kind::Ket) return QMatrix(space_, data_ * other.data_, Kind::Ket);
  return QMatrix(space_, data_ * other.data_);
}

QMatrix QMatrix::operator*(cplx s) const { return QMatrix(space_, data_ * s, kind_ == Kind::Ket ? Kind::Ket : Kind::Operator); }

QMatrix commutator(const QMatrix& a, const QMatrix& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------

Mat local_annihilation(int dim) {
  Mat a = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Mat local_number(int dim) {
  Mat n = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Mat local_parity(int dim) {
  Mat p = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

QMatrix embed_many(const SpacePtr& space, const std::vector<std::pair<std::string, Mat>>& locals) {
  std::vector<const Mat*> per_factor(space->factors().size(), nullptr);
  for (const auto& [label, m] : locals) {
    const std::size_t idx = space->index_of(label);
    const int d = space->factors()[idx].dim;
    if (m.rows() != d || m.cols() != d) throw SpaceError("local operator shape does not match factor '" + label + "'");
    if (per_factor[idx] != nullptr) throw SpaceError("factor '" + label + "' embedded twice");
    per_factor[idx] = &m;
  }
  Mat out = Mat::Identity(1, 1);
  for (std::size_t i = 0; i < per_factor.size(); ++i) {
    const int d = space->factors()[i].dim;
    out = per_factor[i] ? kron(out, *per_factor[i]) : kron(out, Mat::Identity(d, d));
  }
  return QMatrix(space, std::move(out));
}

QMatrix embed(const SpacePtr& space, const std::string& label, const Mat& local) {
  return embed_many(space, {{label, local}});
}

QMatrix annihilation(const SpacePtr& space, const std::string& label) {
  const int d = space->dim_of(label);
  if (d < 2) throw SpaceError("factor '" + label + "' needs dimension >= 2 for a ladder operator");
  return embed(space, label, local_annihilation(d));
}

QMatrix number(const SpacePtr& space, const std::string& label) {
  return embed(space, label, local_number(space->dim_of(label)));
}

QubitOps qubit_ops(const SpacePtr& space) {
  if (!space->has("qubit") || space->dim_of("qubit") != 2) throw SpaceError("space has no two-level 'qubit' factor");
  Mat sz(2, 2), sm(2, 2);
  sz << -1.0, 0.0, 0.0, 1.0;
  sm << 0.0, 1.0, 0.0, 0.0;  // |g><e| with g = 0, e = 1
  Mat sp = sm.adjoint();
  return QubitOps{embed(space, "qubit", sz), embed(space, "qubit", sp), embed(space, "qubit", sm),
                  embed(space, "qubit", Mat(sp + sm))};
}

// ---------------------------------------------------------------------------

double coherent_tail(int dim, cplx alpha) {
  const double r2 = std::norm(alpha);
  if (r2 == 0.0) return 0.0;
  const double log_r2 = std::log(r2);
  double tail = 0.0;
  for (int n = dim;; ++n) {
    const double term = std::exp(-r2 + n * log_r2 - std::lgamma(n + 1.0));
    tail += term;
    if (n > r2 && term < 1e-30 * std::max(tail, 1e-300)) break;
    if (n > dim + 10000) break;
  }
  return tail;
}

namespace {

Vec coherent_amplitudes(int dim, cplx alpha) {
  if (dim < 1) throw TruncationError("coherent state needs dim >= 1");
  const double tail = coherent_tail(dim, alpha);
  if (tail >= kTailGate) {
    std::ostringstream os;
    os << "Fock truncation " << dim << " too small for |alpha| = " << std::abs(alpha) << " (tail mass " << tail << ")";
    throw TruncationError(os.str());
  }
  Vec c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  c /= c.norm();
  return c;
}

}  // namespace

QMatrix coherent_state(int dim, cplx alpha) {
  return QMatrix::ket(CompositeSpace::single("magnon", dim), coherent_amplitudes(dim, alpha));
}

QMatrix coherent_state(const SpacePtr& space, const std::string& label, cplx alpha) {
  if (space->factors().size() != 1) throw SpaceError("coherent_state expects a single-factor space");
  if (space->factors()[0].label != label) throw SpaceError("unknown factor label '" + label + "'");
  return QMatrix::ket(space, coherent_amplitudes(space->total_dim(), alpha));
}

QMatrix fock_state(const SpacePtr& space, const std::vector<int>& occupation) {
  if (occupation.size() != space->factors().size()) throw SpaceError("occupation list does not match factor count");
  int idx = 0;
  for (std::size_t i = 0; i < occupation.size(); ++i) {
    if (occupation[i] < 0 || occupation[i] >= space->factors()[i].dim) throw TruncationError("Fock index outside truncation");
    idx += occupation[i] * space->stride(i);
  }
  Vec v = Vec::Zero(space->total_dim());
  v(idx) = 1.0;
  return QMatrix::ket(space, std::move(v));
}

Mat displacement_matrix(int dim, cplx beta) {
  if (beta == cplx(0.0)) return Mat::Identity(dim, dim);
  const Mat a = local_annihilation(dim);
  // beta a^dag - beta^* a = i K with K Hermitian; exp(iK) = V exp(i lambda) V^dag
  const Mat k = -kI * (beta * a.adjoint() - std::conj(beta) * a);
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  const Eigen::VectorXd lam = es.eigenvalues();
  Vec phases(dim);
  for (int i = 0; i < dim; ++i) phases(i) = std::exp(kI * lam(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

QMatrix displacement(int dim, cplx beta) {
  return QMatrix(CompositeSpace::single("magnon", dim), displacement_matrix(dim, beta));
}

QMatrix parity(int dim) {
  if (dim < 1) throw SpaceError("parity needs dim >= 1");
  return QMatrix(CompositeSpace::single("magnon", dim), local_parity(dim));
}

// ---------------------------------------------------------------------------

QMatrix partial_trace(const QMatrix& rho_in, const std::string& keep) {
  const QMatrix rho = rho_in.to_density();
  const auto& space = *rho.space();
  const std::size_t k = space.index_of(keep);
  const int dk = space.factors()[k].dim;
  const int sk = space.stride(k);
  const int n = space.total_dim();
  std::vector<int> a(n), rest(n);
  for (int i = 0; i < n; ++i) {
    a[i] = (i / sk) % dk;
    rest[i] = i - a[i] * sk;
  }
  Mat red = Mat::Zero(dk, dk);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rest[i] == rest[j]) red(a[i], a[j]) += rho.data()(i, j);
    }
  }
  return QMatrix(CompositeSpace::single(keep, dk), std::move(red), Kind::Density);
}

cplx expectation(const QMatrix& state, const QMatrix& op) {
  if (!(*state.space() == *op.space())) throw SpaceError("state and observable live on different spaces");
  if (state.kind() == Kind::Ket) return (state.data().adjoint() * op.data() * state.data())(0, 0);
  return (state.data() * op.data()).trace();
}

double variance(const QMatrix& state, const QMatrix& op) {
  if (!op.is_hermitian(1e-10)) throw InvariantError("variance requires a Hermitian observable");
  const cplx m1 = expectation(state, op);
  const cplx m2 = expectation(state, op * op);
  return m2.real() - m1.real() * m1.real();
}

double min_eigenvalue(const Mat& rho) {
  const Mat h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace magcat
