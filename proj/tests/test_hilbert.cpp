#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magcat/hilbert.hpp"

using namespace magcat;

namespace {

Mat random_density(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

cplx random_amplitude(std::mt19937& rng, double max_abs) {
  std::uniform_real_distribution<double> r(0.0, max_abs), ph(0.0, 2.0 * kPi);
  return std::polar(r(rng), ph(rng));
}

Vec basis(int n, int k) {
  Vec v = Vec::Zero(n);
  v(k) = 1.0;
  return v;
}

}  // namespace

// ---------- spaces ----------

TEST(CompositeSpace, DimensionIsProductOfFactors) {
  const auto s = CompositeSpace::cavity_qubit_magnon(3, 7);
  EXPECT_EQ(s->total_dim(), 42);
  EXPECT_EQ(s->stride(0), 14);
  EXPECT_EQ(s->stride(1), 7);
  EXPECT_EQ(s->stride(2), 1);
}

TEST(CompositeSpace, RejectsBadLayouts) {
  EXPECT_THROW(CompositeSpace({}), SpaceError);
  EXPECT_THROW(CompositeSpace({{"a", 2}, {"a", 3}}), SpaceError);
  EXPECT_THROW(CompositeSpace({{"a", 0}}), SpaceError);
  EXPECT_THROW(CompositeSpace::qubit_magnon(4)->index_of("cavity"), SpaceError);
}

TEST(QMatrix, KindInvariantsAreEnforced) {
  const auto s = CompositeSpace::single("magnon", 3);
  EXPECT_THROW(QMatrix::ket(s, Vec::Ones(3)), InvariantError);
  Mat bad = Mat::Identity(3, 3);
  EXPECT_THROW(QMatrix::density(s, bad), InvariantError);
  bad = Mat::Zero(3, 3);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(QMatrix::density(s, bad), InvariantError);
  bad = Mat::Zero(3, 3);
  bad(0, 0) = 1.0;
  bad(0, 1) = 0.1;
  EXPECT_THROW(QMatrix::density(s, bad), InvariantError);
  EXPECT_THROW(QMatrix(s, Mat::Identity(2, 2)), SpaceError);
}

TEST(QMatrix, ArithmeticRequiresSameSpace) {
  const auto a = QMatrix::identity(CompositeSpace::single("magnon", 3));
  const auto b = QMatrix::identity(CompositeSpace::single("cavity", 3));
  EXPECT_THROW(a + b, SpaceError);
  EXPECT_THROW(a * b, SpaceError);
  // equal layouts held by different pointers are the same space
  EXPECT_NO_THROW(a * QMatrix::identity(CompositeSpace::single("magnon", 3)));
}

// ---------- ladder and qubit operators ----------

TEST(Annihilation, LowersFockStates) {
  const auto s = CompositeSpace::single("magnon", 5);
  const Mat a = annihilation(s, "magnon").data();
  EXPECT_NEAR(std::abs((a * basis(5, 1))(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR((a * basis(5, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(3, 4) - 2.0), 0.0, 1e-15);
}

TEST(Annihilation, Errors) {
  EXPECT_THROW(annihilation(CompositeSpace::single("magnon", 5), "cavity"), SpaceError);
  EXPECT_THROW(annihilation(CompositeSpace::single("magnon", 1), "magnon"), SpaceError);
}

TEST(QubitOps, PauliAlgebra) {
  const auto s = CompositeSpace::qubit_magnon(3);
  const auto q = qubit_ops(s);
  const auto e = fock_state(s, {1, 0});
  const auto g = fock_state(s, {0, 0});
  EXPECT_NEAR((q.sm.data() * e.data() - g.data()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((commutator(q.sp, q.sm).data() - q.sz.data()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(expectation(g, q.sz).real(), -1.0, 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat> es(q.sz.data());
  EXPECT_NEAR(es.eigenvalues().minCoeff(), -1.0, 1e-15);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-15);
  EXPECT_THROW(qubit_ops(CompositeSpace::single("magnon", 3)), SpaceError);
}

// ---------- coherent states and displacement ----------

TEST(CoherentState, VacuumAtZero) {
  const Vec v = coherent_state(10, 0.0).data().col(0);
  EXPECT_NEAR((v - basis(10, 0)).norm(), 0.0, 1e-15);
}

TEST(CoherentState, PoissonMeanAndOverlap) {
  const double a = 1.58;
  const auto s = coherent_state(40, a);
  const auto n = number(s.space(), "magnon");
  EXPECT_NEAR(expectation(s, n).real(), a * a, 1e-8);
  EXPECT_NEAR(expectation(s, n).real(), 2.4964, 1e-12);
  const cplx ov = (coherent_state(40, -a).data().adjoint() * s.data())(0, 0);
  EXPECT_NEAR(ov.real(), std::exp(-2.0 * a * a), 1e-8);
}

TEST(CoherentState, TailGate) {
  EXPECT_THROW(coherent_state(6, 1.58), TruncationError);
  EXPECT_GT(coherent_tail(6, 1.58), kTailGate);
  EXPECT_LT(coherent_tail(40, 1.58), 1e-20);
}

TEST(Displacement, IdentityAtZero) {
  EXPECT_NEAR((displacement(12, 0.0).data() - Mat::Identity(12, 12)).norm(), 0.0, 1e-14);
}

TEST(Displacement, MatchesCoherentState) {
  const Vec d0 = displacement(40, 1.5).data().col(0);
  const Vec c = coherent_state(40, 1.5).data().col(0);
  EXPECT_GT(std::norm(c.dot(d0)), 1.0 - 1e-8);
}

TEST(Displacement, InverseOnLowLevels) {
  const Mat p = displacement(40, 1.5).data() * displacement(40, -1.5).data();
  EXPECT_LT((p.topLeftCorner(20, 20) - Mat::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Displacement, PropertyOverRandomAmplitudes) {
  std::mt19937 rng(7);
  const int dim = 40;
  const Mat p = parity(dim).data();
  for (int trial = 0; trial < 20; ++trial) {
    const cplx b = random_amplitude(rng, 2.0);
    const Mat d = displacement_matrix(dim, b);
    EXPECT_GT(std::norm(coherent_state(dim, b).data().col(0).dot(d.col(0))), 1.0 - 1e-8);
    EXPECT_LT((d * displacement_matrix(dim, -b) - Mat::Identity(dim, dim)).topLeftCorner(20, 20).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((p * d * p - displacement_matrix(dim, -b)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((d.adjoint() * d - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Parity, Entries) {
  const Mat p = parity(6).data();
  EXPECT_EQ(p(0, 0), cplx(1.0));
  EXPECT_EQ(p(1, 1), cplx(-1.0));
  EXPECT_NEAR((p * p - Mat::Identity(6, 6)).norm(), 0.0, 0.0);
}

// ---------- embeddings and partial trace ----------

TEST(Embedding, SequentialEqualsJoint) {
  std::mt19937 rng(3);
  const auto s = CompositeSpace::cavity_qubit_magnon(3, 4);
  const Mat a = random_density(3, rng);
  const Mat b = random_density(4, rng);
  const Mat seq = (embed(s, "cavity", a) * embed(s, "magnon", b)).data();
  const Mat joint = embed_many(s, {{"cavity", a}, {"magnon", b}}).data();
  EXPECT_LT((seq - joint).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((joint - kron(kron(a, Mat::Identity(2, 2)), b)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, ProductState) {
  const auto s = CompositeSpace::qubit_magnon(4);
  const auto rm = partial_trace(fock_state(s, {0, 0}), "magnon");
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = 1.0;
  EXPECT_LT((rm.data() - expect).norm(), 1e-15);
}

TEST(PartialTrace, BellLikeState) {
  const auto s = CompositeSpace::qubit_magnon(2);
  Vec psi = (fock_state(s, {0, 0}).data() + fock_state(s, {1, 1}).data()) / std::sqrt(2.0);
  const auto rm = partial_trace(QMatrix::ket(s, psi), "magnon");
  EXPECT_LT((rm.data() - 0.5 * Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(PartialTrace, RandomProductsAndTrace) {
  std::mt19937 rng(11);
  const auto s = CompositeSpace::qubit_magnon(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat ra = random_density(2, rng);
    const Mat rb = random_density(5, rng);
    const QMatrix rho(s, kron(ra, rb), Kind::Density);
    EXPECT_LT((partial_trace(rho, "qubit").data() - ra).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((partial_trace(rho, "magnon").data() - rb).cwiseAbs().maxCoeff(), 1e-12);
    const QMatrix mixed(s, random_density(10, rng), Kind::Density);
    EXPECT_NEAR(partial_trace(mixed, "magnon").data().trace().real(), 1.0, 1e-12);
  }
  EXPECT_THROW(partial_trace(QMatrix(s, kron(Mat::Identity(2, 2), Mat::Identity(5, 5)) / 10.0), "cavity"), SpaceError);
}

// ---------- expectations ----------

TEST(Expectation, VacuumQuadratures) {
  const auto s = CompositeSpace::single("magnon", 10);
  const auto a = annihilation(s, "magnon");
  const auto x1 = (1.0 / std::sqrt(2.0)) * (a + a.adjoint());
  const auto x2 = cplx(0.0, 1.0 / std::sqrt(2.0)) * (a.adjoint() - a);
  const auto vac = fock_state(s, {0});
  EXPECT_NEAR(variance(vac, x1), 0.5, 1e-14);
  EXPECT_NEAR(variance(vac, x2), 0.5, 1e-14);
}

TEST(Expectation, Errors) {
  const auto s = CompositeSpace::single("magnon", 4);
  const auto a = annihilation(s, "magnon");
  EXPECT_THROW(variance(fock_state(s, {1}), a), InvariantError);
  EXPECT_THROW(expectation(fock_state(s, {1}), QMatrix::identity(CompositeSpace::single("magnon", 5))), SpaceError);
}
