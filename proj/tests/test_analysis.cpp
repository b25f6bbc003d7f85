#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "magcat/analysis.hpp"

using namespace magcat;

namespace {

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Mat random_density(int n, int rank, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat a(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

/// Random density confined to the lowest `support` Fock levels of a dim-level space.
Mat low_density(int dim, int support, std::mt19937& rng) {
  Mat rho = Mat::Zero(dim, dim);
  rho.topLeftCorner(support, support) = random_density(support, 3, rng);
  return rho;
}

/// (2/pi) Tr[rho D P D^dag] with D = exp(beta a^dag - beta* a) built far above the support of rho.
double brute_wigner(const Mat& rho, cplx beta) {
  const int dim = static_cast<int>(rho.rows());
  const int big = dim + 80;
  Mat a = Mat::Zero(big, big);
  for (int n = 1; n < big; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Mat d = (beta * a.adjoint() - std::conj(beta) * a).exp();
  const Mat dpd = d * parity(big).data() * d.adjoint();
  return 2.0 / kPi * (rho * dpd.topLeftCorner(dim, dim)).trace().real();
}

QMatrix magnon_density(const Mat& rho) {
  return QMatrix::density(CompositeSpace::single("magnon", static_cast<int>(rho.rows())), rho);
}

Vec cat_by_superposition(int dim, cplx alpha, double sign) {
  Vec v = coherent_state(dim, alpha).data().col(0) + sign * coherent_state(dim, -alpha).data().col(0);
  return v / v.norm();
}

}  // namespace

// ---------- fidelities ----------

TEST(Fidelity, PureTargets) {
  const auto s = CompositeSpace::single("magnon", 4);
  const auto zero = fock_state(s, {0}).to_density();
  const auto one = fock_state(s, {1}).to_density();
  EXPECT_NEAR(fidelity_overlap(zero, zero), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_overlap(zero, one), 0.0, 1e-15);
  const auto mix = QMatrix::density(s, 0.5 * (zero.data() + one.data()));
  EXPECT_NEAR(fidelity_overlap(zero, mix), 0.5, 1e-15);
  EXPECT_NEAR(normalized_overlap(mix, mix), 1.0, 1e-15);
}

TEST(Fidelity, UhlmannProperties) {
  std::mt19937 rng(1);
  for (int k = 0; k < 10; ++k) {
    const Mat a = random_density(6, 6, rng), b = random_density(6, 2, rng);
    EXPECT_NEAR(uhlmann_fidelity(a, a), 1.0, 1e-8);
    const double f = uhlmann_fidelity(a, b);
    EXPECT_NEAR(f, uhlmann_fidelity(b, a), 1e-8);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-10);
  }
  const Vec u = coherent_state(20, 0.8).data().col(0), v = coherent_state(20, -0.3).data().col(0);
  EXPECT_NEAR(uhlmann_fidelity(u * u.adjoint(), v * v.adjoint()), std::norm(u.dot(v)), 1e-8);
}

// ---------- cats ----------

TEST(Cat, MatchesCoherentSuperposition) {
  for (double a : {0.5, 1.0, 1.582, 2.0}) {
    for (auto [parity, sign] : {std::pair{CatParity::Even, 1.0}, std::pair{CatParity::Odd, -1.0}}) {
      const Vec cat = analytic_cat(40, CatSpec{a, parity}).data().col(0);
      EXPECT_GT(std::norm(cat.dot(cat_by_superposition(40, a, sign))), 1.0 - 1e-10);
    }
  }
}

TEST(Cat, ParitySupport) {
  const Vec even = analytic_cat(30, CatSpec{1.3, CatParity::Even}).data().col(0);
  const Vec odd = analytic_cat(30, CatSpec{1.3, CatParity::Odd}).data().col(0);
  for (int n = 0; n < 30; ++n) {
    EXPECT_LT(std::abs((n % 2 ? even : odd)(n)), 1e-10);
  }
}

TEST(Cat, SmallAmplitudeLimits) {
  const Vec even = analytic_cat(10, CatSpec{1e-6, CatParity::Even}).data().col(0);
  const Vec odd = analytic_cat(10, CatSpec{1e-6, CatParity::Odd}).data().col(0);
  EXPECT_NEAR(std::abs(even(0)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(odd(1)), 1.0, 1e-10);
  EXPECT_NO_THROW(analytic_cat(10, CatSpec{0.0, CatParity::Odd}));
}

TEST(Cat, Normalization) {
  const CatSpec even{1.582, CatParity::Even}, odd{1.582, CatParity::Odd};
  const double x = std::exp(-2.0 * 1.582 * 1.582);
  EXPECT_NEAR(even.normalization(), 1.0 / std::sqrt(2.0 * (1.0 + x)), 1e-15);
  EXPECT_NEAR(odd.normalization(), 1.0 / std::sqrt(2.0 * (1.0 - x)), 1e-15);
}

TEST(Cat, RecursionHolds) {
  for (double a : {0.5, 1.0, 1.582, 2.0}) {
    for (CatParity p : {CatParity::Even, CatParity::Odd}) {
      const Vec cat = analytic_cat(40, CatSpec{a, p}).data().col(0);
      EXPECT_LT(recursion_check(cat, a), 1e-10);
    }
  }
  const Vec fock2 = fock_state(CompositeSpace::single("magnon", 10), {2}).data().col(0);
  EXPECT_GT(recursion_check(fock2, 1.0), 0.5);
}

TEST(Cat, TruncationGate) { EXPECT_THROW(analytic_cat(8, CatSpec{1.582, CatParity::Even}), TruncationError); }

TEST(Cat, DominantKetRecoversPureState) {
  const Vec cat = analytic_cat(30, CatSpec{1.2, CatParity::Odd}).data().col(0);
  const Mat rho = 0.9 * cat * cat.adjoint() + 0.1 * Mat::Identity(30, 30) / 30.0;
  EXPECT_GT(std::norm(dominant_ket(rho).dot(cat)), 1.0 - 1e-12);
}

// ---------- Wigner ----------

TEST(Wigner, MatchesBruteForce) {
  std::mt19937 rng(2);
  const Mat rho = low_density(16, 6, rng);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 15; ++k) {
    const cplx beta(u(rng), u(rng));
    EXPECT_NEAR(wigner_at(rho, beta), brute_wigner(rho, beta), 1e-9);
  }
}

TEST(Wigner, OriginIsScaledParity) {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Mat rho = random_density(12, 1 + k % 4, rng);
    const double p = (rho * parity(12).data()).trace().real();
    EXPECT_NEAR(wigner_at(rho, 0.0), 2.0 / kPi * p, 1e-12);
  }
}

TEST(Wigner, VacuumGaussian) {
  Mat vac = Mat::Zero(20, 20);
  vac(0, 0) = 1.0;
  for (cplx beta : {cplx(0.0), cplx(0.5, -0.2), cplx(1.1, 0.7)}) {
    EXPECT_NEAR(wigner_at(vac, beta), 2.0 / kPi * std::exp(-2.0 * std::norm(beta)), 1e-12);
  }
}

TEST(Wigner, GridNormalizationAndBound) {
  const auto cat = analytic_cat(60, CatSpec{1.582, CatParity::Even}).to_density();
  const auto grid = wigner(cat, Axis{-4.0, 4.0, 161}, Axis{-4.0, 4.0, 161});
  EXPECT_EQ(grid.values.rows(), 161);
  EXPECT_NEAR(grid.integral(), 1.0, 1e-3);
  EXPECT_LE(grid.max_abs(), 2.0 / kPi + 1e-6);
  EXPECT_NEAR(grid.nearest(0.0), 2.0 / kPi, 1e-9);
}

TEST(Wigner, MarginalIsQuadratureDistribution) {
  // Integrating over Im beta leaves |<x|psi>|^2 with x = sqrt2 Re beta; for a coherent state a Gaussian.
  const auto coh = coherent_state(60, cplx(0.8, 0.3)).to_density();
  const Axis re{-3.0, 3.0, 61}, im{-4.0, 4.0, 161};
  const auto grid = wigner(coh, re, im);
  for (int j = 0; j < re.n; j += 10) {
    const double marginal = grid.values.col(j).sum() * im.step();
    const double x = re.at(j);
    EXPECT_NEAR(marginal, std::sqrt(2.0 / kPi) * std::exp(-2.0 * (x - 0.8) * (x - 0.8)), 1e-6);
  }
}

TEST(Wigner, TruncationGateUsesGridExtent) {
  const auto cat = analytic_cat(30, CatSpec{1.582, CatParity::Even}).to_density();
  EXPECT_THROW(wigner(cat, Axis{}, Axis{}), TruncationError);
  EXPECT_NO_THROW(wigner(cat, Axis{-2.0, 2.0, 41}, Axis{-2.0, 2.0, 41}));
  EXPECT_NEAR(grid_extent(Axis{-3.0, 3.0, 5}, Axis{-1.0, 2.0, 5}), 3.0, 1e-15);
}

TEST(Wigner, MixturePeaksAtPlusMinusAlpha) {
  const double a = 1.582;
  const auto even = analytic_cat(40, CatSpec{a, CatParity::Even}).data();
  const auto odd = analytic_cat(40, CatSpec{a, CatParity::Odd}).data();
  const auto mixture = magnon_density(0.5 * (even * even.adjoint() + odd * odd.adjoint()));
  const auto peaks = wigner_peaks(wigner(mixture, Axis{}, Axis{}), 0.5);
  ASSERT_EQ(peaks.size(), 2u);
  ASSERT_GE(peaks.size(), 2u);
  std::vector<double> re{peaks[0].real(), peaks[1].real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -a, 0.1);
  EXPECT_NEAR(re[1], a, 0.1);
  EXPECT_NEAR(peaks[0].imag(), 0.0, 0.1);
}

TEST(Wigner, FringeVerdict) {
  const double a = 1.582;
  const auto even = analytic_cat(40, CatSpec{a, CatParity::Even}).to_density();
  const auto odd = analytic_cat(40, CatSpec{a, CatParity::Odd}).to_density();
  EXPECT_FALSE(fringe_verdict(even).cancelled);
  const auto mixture = magnon_density(0.5 * (even.data() + odd.data()));
  const auto v = fringe_verdict(mixture);
  EXPECT_TRUE(v.cancelled);
  EXPECT_LT(v.segment_max, kFringeThreshold * v.grid_max);
}

// ---------- superpositions and steady predictions ----------

TEST(Superposition, KetAndAmplitudes) {
  const InitialSuperposition s{kPi / 2.0, kPi / 2.0};
  EXPECT_NEAR(std::abs(s.a() - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.b() - cplx(0.0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  const Vec k = s.ket(5);
  EXPECT_NEAR(k.norm(), 1.0, 1e-15);
  EXPECT_EQ(k(2), cplx(0.0));
}

TEST(PredictSteady, Weights) {
  const auto p = predict_steady(InitialSuperposition{kPi / 2.0, kPi / 2.0}, 1.582, 40);
  EXPECT_NEAR(p.even_weight, 0.5, 1e-15);
  EXPECT_NEAR(p.odd_weight, 0.5, 1e-15);
  EXPECT_NEAR(p.coherent.data().trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(p.mixture.data().trace().real(), 1.0, 1e-12);
  const auto q = predict_steady(InitialSuperposition{kPi / 3.0, 0.0}, 1.582, 40);
  EXPECT_NEAR(q.even_weight, std::pow(std::cos(kPi / 6.0), 2), 1e-15);
}

TEST(PredictSteady, ClassifiesItsOwnCandidates) {
  const auto p = predict_steady(InitialSuperposition{kPi / 2.0, kPi / 2.0}, 1.582, 40);
  EXPECT_EQ(classify_steady(p, p.mixture).closer, "mixture");
  EXPECT_EQ(classify_steady(p, p.coherent).closer, "coherent");
  EXPECT_TRUE(classify_steady(p, p.mixture).fringes.cancelled);
}

TEST(PredictSteady, PureLimitsAreCats) {
  const auto p = predict_steady(InitialSuperposition{0.0, 0.0}, 1.0, 30);
  const auto cat = analytic_cat(30, CatSpec{1.0, CatParity::Even}).to_density();
  EXPECT_LT(max_abs(p.coherent.data() - cat.data()), 1e-12);
  EXPECT_LT(max_abs(p.mixture.data() - cat.data()), 1e-12);
}

// ---------- quadratures ----------

TEST(Quadratures, CoherentState) {
  const cplx a(0.7, -0.4);
  const auto s = quadrature_stats(coherent_state(40, a).to_density());
  EXPECT_NEAR(s.var_x1, 0.5, 1e-10);
  EXPECT_NEAR(s.var_x2, 0.5, 1e-10);
  EXPECT_NEAR(s.mean_x1, std::sqrt(2.0) * a.real(), 1e-10);
  EXPECT_NEAR(s.mean_x2, std::sqrt(2.0) * a.imag(), 1e-10);
}

TEST(Quadratures, SqueezedVacuum) {
  const int dim = 60;
  Mat m = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  const double r = 0.4;
  const Mat s = (0.5 * r * (m * m - m.adjoint() * m.adjoint())).exp();
  const Vec psi = s.col(0);
  const auto q = quadrature_stats(magnon_density(psi * psi.adjoint() / psi.squaredNorm()));
  EXPECT_NEAR(q.var_x1, 0.5 * std::exp(-2.0 * r), 1e-8);
  EXPECT_NEAR(q.var_x2, 0.5 * std::exp(2.0 * r), 1e-8);
}
