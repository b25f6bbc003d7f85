#include "magcat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

namespace magcat {

namespace {

void require_magnon(const QMatrix& rho, const char* who) {
  const auto& f = rho.space()->factors();
  if (f.size() != 1 || f[0].label != "magnon") throw SpaceError(std::string(who) + " expects a magnon-only state");
}

double real_trace(const Mat& a, const Mat& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }

Mat psd_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity_overlap(const QMatrix& target, const QMatrix& rho) {
  if (!(*target.space() == *rho.space())) throw SpaceError("fidelity operands live on different spaces");
  return real_trace(target.to_density().data(), rho.to_density().data());
}

double normalized_overlap(const QMatrix& a, const QMatrix& b) {
  if (!(*a.space() == *b.space())) throw SpaceError("overlap operands live on different spaces");
  const Mat ra = a.to_density().data();
  const Mat rb = b.to_density().data();
  const double purity = std::max(real_trace(ra, ra), real_trace(rb, rb));
  return real_trace(ra, rb) / purity;
}

double uhlmann_fidelity(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw SpaceError("fidelity operands differ in shape");
  const Mat sa = psd_sqrt(a);
  const Mat m = sa * b * sa;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root * root;
}

// ---------------------------------------------------------------------------

double CatSpec::normalization() const {
  const double overlap = std::exp(-2.0 * std::norm(alpha));
  const double sign = parity == CatParity::Even ? 1.0 : -1.0;
  return 1.0 / std::sqrt(2.0 * (1.0 + sign * overlap));
}

QMatrix analytic_cat(int dim, const CatSpec& spec) {
  if (dim < 2) throw SpaceError("cat states need a magnon dimension of at least 2");
  const double tail = coherent_tail(dim, spec.alpha);
  if (tail >= kTailGate) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "dimension %d leaves a coherent tail of %.3e", dim, tail);
    throw TruncationError(buf);
  }
  // c_{n+2} = alpha^2 c_n / sqrt((n+1)(n+2)), seeded on the parity's lowest level
  const cplx a2 = spec.alpha * spec.alpha;
  Vec c = Vec::Zero(dim);
  const int start = spec.parity == CatParity::Even ? 0 : 1;
  c(start) = 1.0;
  for (int n = start; n + 2 < dim; n += 2) c(n + 2) = c(n) * a2 / std::sqrt(double(n + 1) * double(n + 2));
  c /= c.norm();
  return QMatrix::ket(CompositeSpace::single("magnon", dim), c);
}

double recursion_check(const Vec& ket, cplx alpha) {
  const cplx a2 = alpha * alpha;
  double worst = 0.0;
  for (Eigen::Index n = 0; n + 2 < ket.size(); ++n) {
    const double r = std::abs(ket(n + 2) * std::sqrt(double(n + 1) * double(n + 2)) - a2 * ket(n));
    worst = std::max(worst, r);
  }
  return worst;
}

Vec dominant_ket(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  Vec v = es.eigenvectors().col(rho.rows() - 1);
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::abs(v(k)) / v(k);
  return v;
}

// ---------------------------------------------------------------------------

double WignerGrid::integral() const { return values.sum() * re.step() * im.step(); }

double WignerGrid::max_abs() const { return values.cwiseAbs().maxCoeff(); }

double WignerGrid::nearest(cplx beta) const {
  auto idx = [](const Axis& ax, double v) {
    if (ax.n == 1) return 0;
    const int i = static_cast<int>(std::lround((v - ax.min) / ax.step()));
    return std::clamp(i, 0, ax.n - 1);
  };
  return values(idx(im, beta.imag()), idx(re, beta.real()));
}

double grid_extent(const Axis& re, const Axis& im) {
  return std::max({std::abs(re.min), std::abs(re.max), std::abs(im.min), std::abs(im.max)});
}

namespace {

/// Matrix elements <n|D(g)|m> of the untruncated displacement for n, m < dim.
class DisplacementElements {
 public:
  explicit DisplacementElements(int dim) : dim_(dim), lfact_(dim) {
    for (int n = 0; n < dim; ++n) lfact_[n] = std::lgamma(n + 1.0);
  }

  /// Fills d(n, m) = <n|D(g)|m>.
  void fill(cplx g, Mat& d) const {
    d.resize(dim_, dim_);
    const double x = std::norm(g);
    const double r = std::abs(g);
    const double ph = std::arg(g);
    const double log_r = r > 0.0 ? std::log(r) : 0.0;
    std::vector<double> lag(dim_);
    for (int k = 0; k < dim_; ++k) {
      // generalized Laguerre L_m^{(k)}(x), forward recurrence in m
      lag[0] = 1.0;
      if (dim_ - k > 1) lag[1] = 1.0 + k - x;
      for (int m = 1; m + 1 < dim_ - k; ++m) lag[m + 1] = ((2.0 * m + 1.0 + k - x) * lag[m] - (m + k) * lag[m - 1]) / (m + 1.0);
      for (int m = 0; m + k < dim_; ++m) {
        const int n = m + k;
        double mag;
        if (k == 0) {
          mag = std::exp(-0.5 * x);
        } else if (r == 0.0) {
          mag = 0.0;
        } else {
          mag = std::exp(0.5 * (lfact_[m] - lfact_[n]) + k * log_r - 0.5 * x);
        }
        const double v = mag * lag[m];
        d(n, m) = std::polar(v, k * ph);  // g^k
        if (k > 0) d(m, n) = std::polar(v, k * (kPi - ph));  // (-g*)^k
      }
    }
  }

 private:
  int dim_;
  std::vector<double> lfact_;
};

double wigner_with(const Mat& rho, cplx beta, const DisplacementElements& de, Mat& d) {
  de.fill(2.0 * beta, d);
  // (2/pi) sum_{m,n} rho_mn <n|D(2 beta)|m> (-1)^m
  const Eigen::Index n = rho.rows();
  cplx acc = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    cplx col = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) col += rho(m, k) * d(k, m);
    acc += (m % 2 == 0 ? 1.0 : -1.0) * col;
  }
  return 2.0 / kPi * acc.real();
}

}  // namespace

double wigner_at(const Mat& rho_m, cplx beta) {
  DisplacementElements de(static_cast<int>(rho_m.rows()));
  Mat d;
  return wigner_with(rho_m, beta, de, d);
}

WignerGrid wigner(const QMatrix& rho_in, const Axis& re, const Axis& im) {
  require_magnon(rho_in, "wigner");
  if (re.n < 1 || im.n < 1 || re.max < re.min || im.max < im.min) throw std::invalid_argument("invalid Wigner grid axes");
  const int dim = rho_in.dim();
  const double extent = grid_extent(re, im);
  const double tail = coherent_tail(dim, cplx(extent, 0.0));
  if (tail >= kTailGate) {
    throw TruncationError("magnon dimension " + std::to_string(dim) + " fails the tail gate at |beta| = " +
                          std::to_string(extent));
  }
  const Mat rho = rho_in.to_density().data();
  DisplacementElements de(dim);
  Mat d;
  WignerGrid g{re, im, Eigen::MatrixXd(im.n, re.n)};
  for (int i = 0; i < im.n; ++i) {
    for (int j = 0; j < re.n; ++j) g.values(i, j) = wigner_with(rho, cplx(re.at(j), im.at(i)), de, d);
  }
  return g;
}

std::vector<cplx> wigner_peaks(const WignerGrid& grid, double threshold) {
  const auto& w = grid.values;
  const double top = w.maxCoeff();
  std::vector<std::pair<double, cplx>> found;
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      const double v = w(i, j);
      if (v < threshold * top) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int ii = i + di, jj = j + dj;
          if ((di || dj) && ii >= 0 && jj >= 0 && ii < w.rows() && jj < w.cols() && w(ii, jj) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) found.emplace_back(v, cplx(grid.re.at(j), grid.im.at(i)));
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<cplx> out;
  for (const auto& f : found) out.push_back(f.second);
  return out;
}

FringeVerdict fringe_verdict(const QMatrix& rho_m, const Axis& re, const Axis& im) {
  const WignerGrid g = wigner(rho_m, re, im);
  const Mat rho = rho_m.to_density().data();
  DisplacementElements de(rho_m.dim());
  Mat d;
  FringeVerdict v;
  v.grid_max = g.max_abs();
  constexpr int kSegment = 201;
  for (int i = 0; i < kSegment; ++i) {
    const double y = -1.0 + 2.0 * i / (kSegment - 1);
    v.segment_max = std::max(v.segment_max, std::abs(wigner_with(rho, cplx(0.0, y), de, d)));
  }
  v.cancelled = v.segment_max < kFringeThreshold * v.grid_max;
  return v;
}

// ---------------------------------------------------------------------------

cplx InitialSuperposition::a() const { return std::cos(theta_b / 2.0); }
cplx InitialSuperposition::b() const { return std::sin(theta_b / 2.0) * std::exp(kI * phi_b); }

Vec InitialSuperposition::ket(int dim) const {
  if (dim < 2) throw SpaceError("superposition needs a magnon dimension of at least 2");
  if (theta_b < 0.0 || theta_b > kPi) throw std::invalid_argument("theta_b must lie in [0, pi]");
  Vec v = Vec::Zero(dim);
  v(0) = a();
  v(1) = b();
  return v;
}

SteadyPrediction predict_steady(const InitialSuperposition& init, cplx alpha, int dim) {
  const Vec e = analytic_cat(dim, {alpha, CatParity::Even}).data();
  const Vec o = analytic_cat(dim, {alpha, CatParity::Odd}).data();
  const cplx a = init.a(), b = init.b();
  const double we = std::norm(a), wo = std::norm(b);
  const Mat ee = e * e.adjoint(), oo = o * o.adjoint();
  const Mat mixture = we * ee + wo * oo;
  const Mat cross = (std::conj(a) * b) * (e * o.adjoint());
  const Mat coherent = mixture + cross + cross.adjoint();
  const auto space = CompositeSpace::single("magnon", dim);
  return SteadyPrediction{QMatrix(space, coherent, Kind::Density), QMatrix(space, mixture, Kind::Density), we, wo};
}

SteadyVerdict classify_steady(const SteadyPrediction& prediction, const QMatrix& rho_m) {
  require_magnon(rho_m, "classify_steady");
  auto distance = [](const Mat& x, const Mat& y) {
    const Mat d = x - y;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
  };
  SteadyVerdict v;
  v.distance_coherent = distance(prediction.coherent.data(), rho_m.data());
  v.distance_mixture = distance(prediction.mixture.data(), rho_m.data());
  v.closer = v.distance_mixture <= v.distance_coherent ? "mixture" : "coherent";
  v.fringes = fringe_verdict(rho_m);
  return v;
}

QuadratureStats quadrature_stats(const QMatrix& rho_in) {
  require_magnon(rho_in, "quadrature_stats");
  const Mat rho = rho_in.to_density().data();
  const Mat a = local_annihilation(rho_in.dim());
  const double s = 1.0 / std::sqrt(2.0);
  const Mat x1 = s * (a + a.adjoint());
  const Mat x2 = (kI * s) * (a.adjoint() - a);
  QuadratureStats q;
  q.mean_x1 = real_trace(rho, x1);
  q.mean_x2 = real_trace(rho, x2);
  q.var_x1 = real_trace(rho, x1 * x1) - q.mean_x1 * q.mean_x1;
  q.var_x2 = real_trace(rho, x2 * x2) - q.mean_x2 * q.mean_x2;
  return q;
}

}  // namespace magcat
