#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magcat/model.hpp"

using namespace magcat;

namespace {

constexpr ModelLevel kTwoBodyLevels[] = {ModelLevel::JC,    ModelLevel::Rotating,    ModelLevel::RWA1,
                                         ModelLevel::Rabi,  ModelLevel::Dressed,     ModelLevel::Interaction,
                                         ModelLevel::Effective};

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<double> sorted_eigenvalues(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

/// Smallest single-excitation polariton gap over the qubit frequency (golden-section search).
double three_mode_min_gap(PhysicalParams p) {
  const auto space = CompositeSpace::cavity_qubit_magnon(2, 2);
  auto gap = [&](double wq) {
    p.omega_q = wq;
    const Mat h = build_three_mode(space, Model::make(p)).at(0.0);
    // |1,g,0>, |0,e,0>, |0,g,1>
    const int idx[3] = {4, 2, 1};
    Mat block(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) block(i, j) = h(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<Mat> es(block, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(1) - es.eigenvalues()(0);
  };
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = p.omega - mhz(300.0), b = p.omega + mhz(300.0);
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a), e = a + r * (b - a);
    if (gap(c) < gap(e)) {
      b = e;
    } else {
      a = c;
    }
  }
  return gap(0.5 * (a + b));
}

}  // namespace

// ---------- derivation chain ----------

TEST(Derive, DispersiveCoupling) {
  const auto d = derive(PhysicalParams{});
  EXPECT_NEAR(to_mhz(d.Delta), 254.1, 1e-9);
  EXPECT_NEAR(to_mhz(d.G), 10.0, 1e-9);
}

TEST(Derive, DressedQuantities) {
  const auto d = derive(PhysicalParams{});
  EXPECT_NEAR(to_mhz(d.Delta_m), 0.3, 1e-6);
  EXPECT_NEAR(to_mhz(d.delta_z), 25.0, 1e-12);
  EXPECT_NEAR(std::abs(to_mhz(d.delta_x)), 25.0, 1e-4);
  EXPECT_LT(d.delta_x, 0.0);
  EXPECT_NEAR(d.theta, kPi / 4.0, 1e-5);
  EXPECT_NEAR(to_mhz(d.nu), 35.36, 0.005);
  EXPECT_NEAR(to_mhz(d.g_x), std::sqrt(2.0) * 10.0 / 4.0, 1e-4);
  EXPECT_NEAR(to_mhz(d.g_z), std::sqrt(2.0) * 10.0 / 4.0, 1e-4);
  EXPECT_GT(d.g_x, 0.0);
  EXPECT_GT(d.g_z, 0.0);
  EXPECT_NEAR(to_mhz(d.g_eff), 1.414, 5e-4);
  EXPECT_NEAR(to_mhz(d.delta_m), 0.3 - to_mhz(d.nu) / 2.0, 1e-6);
}

TEST(Derive, CatAmplitude) {
  const auto d = with_g_eff(derive(PhysicalParams{}), mhz(1.41));
  EXPECT_NEAR(d.alpha.real(), 1.582, 5e-4);
  EXPECT_EQ(d.alpha.imag(), 0.0);
}

TEST(Derive, DriveChain) {
  const auto d = derive(PhysicalParams{});
  EXPECT_NEAR(std::abs(d.eps), std::sqrt(2.0) * d.eps_p, 1e-12);
  EXPECT_NEAR(d.eps_p, std::sqrt(2.0) * std::abs(d.eps) / 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(d.eps1, 2.0 * d.eps);
  EXPECT_DOUBLE_EQ(d.eps2, 4.0 * d.eps);
  EXPECT_NEAR(std::abs(d.displacement), 1.25, 1e-5);
}

TEST(Derive, PureAndMismatchNeutral) {
  PhysicalParams p;
  EXPECT_TRUE(derive(p) == derive(p));
  EXPECT_TRUE(derive(p, MismatchParams{0.0, 0.0}) == derive(p));
  const auto shifted = derive(p, MismatchParams{mhz(0.001), 0.0});
  EXPECT_NE(shifted.delta_x, derive(p).delta_x);
  EXPECT_NEAR(shifted.delta_x, -p.eta3 * shifted.G / (shifted.Delta_m - mhz(0.001)), 1e-9);
}

TEST(Derive, Errors) {
  PhysicalParams p;
  p.omega_c = p.omega;
  EXPECT_THROW(derive(p), std::domain_error);
  PhysicalParams q;
  const auto d = derive(q);
  EXPECT_THROW(derive(q, MismatchParams{d.Delta_m, 0.0}), std::domain_error);
  PhysicalParams neg;
  neg.g_q = -1.0;
  EXPECT_THROW(derive(neg), std::invalid_argument);
}

TEST(Derive, ResonantVariantKeepsDeltaX) {
  const PhysicalParams p;
  const auto v = resonant_detuning_variant(p);
  const auto d0 = derive(p);
  const auto d1 = derive(v);
  EXPECT_NEAR(d1.delta_x, d0.delta_x, 1e-9 * std::abs(d0.delta_x));
  EXPECT_NEAR(d1.Delta_m, d0.nu / 2.0, 1e-9 * d0.nu);
  EXPECT_NEAR(d1.delta_m, 0.0, 1e-9 * d0.nu);
  EXPECT_NEAR(d1.displacement, d0.displacement, 1e-12);
}

// ---------- builders ----------

TEST(Builders, HermitianAtRandomTimes) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::qubit_magnon(6);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (ModelLevel level : kTwoBodyLevels) {
    const auto h = build(level, space, model);
    EXPECT_EQ(h.time_dependent(), is_time_dependent(level)) << to_string(level);
    for (int i = 0; i < 100; ++i) {
      const Mat m = h.at(t(rng));
      EXPECT_LT(max_abs(m - m.adjoint()), 1e-10 * std::max(1.0, max_abs(m))) << to_string(level);
    }
  }
  const auto h3 = build_three_mode(CompositeSpace::cavity_qubit_magnon(3, 3), model).at(0.0);
  EXPECT_LT(max_abs(h3 - h3.adjoint()), 1e-10);
}

TEST(Builders, WrongLayoutThrows) {
  const auto model = Model::make(PhysicalParams{});
  EXPECT_THROW(build_jc(CompositeSpace::cavity_qubit_magnon(2, 3), model), SpaceError);
  EXPECT_THROW(build_three_mode(CompositeSpace::qubit_magnon(3), model), SpaceError);
}

TEST(ThreeMode, UncoupledSpectrum) {
  PhysicalParams p;
  p.g_q = 0.0;
  p.g_m = 0.0;
  const auto space = CompositeSpace::cavity_qubit_magnon(2, 3);
  const Mat h = build_three_mode(space, Model::make(p)).at(0.0);
  EXPECT_LT(max_abs(h - Mat(h.diagonal().asDiagonal())), 1e-12);
  const int idx = 0 * 6 + 0 * 3 + 1;  // |0, g, 1>
  EXPECT_NEAR(h(idx, idx).real(), p.omega - p.omega / 2.0, 1e-9);
}

TEST(ThreeMode, SingleExcitationBlockMatchesOracle) {
  const PhysicalParams p;
  const auto space = CompositeSpace::cavity_qubit_magnon(5, 3);
  const Mat h = build_three_mode(space, Model::make(p)).at(0.0);
  Eigen::Matrix3d oracle;
  oracle << p.omega_c, p.g_q, p.g_m, p.g_q, p.omega, 0.0, p.g_m, 0.0, p.omega;
  const double ground = -0.5 * p.omega;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(oracle, Eigen::EigenvaluesOnly);
  const auto full = sorted_eigenvalues(h);
  for (int k = 0; k < 3; ++k) {
    const double e = es.eigenvalues()(k) + ground;
    const double best = *std::min_element(full.begin(), full.end(), [&](double a, double b) {
      return std::abs(a - e) < std::abs(b - e);
    });
    EXPECT_NEAR(best, e, 1e-8 * p.omega_c);
  }
}

TEST(ThreeMode, AnticrossingApproachesTwoGInDispersiveLimit) {
  PhysicalParams p;
  p.g_q /= 10.0;
  p.g_m /= 10.0;
  const auto d = derive(p);
  const double gap = three_mode_min_gap(p);
  EXPECT_NEAR(gap / (2.0 * d.G), 1.0, 0.01);
}

TEST(JC, UncoupledEigenvalues) {
  PhysicalParams p;
  p.g_q = 0.0;
  const auto model = Model::make(p);
  const Mat h = build_jc(CompositeSpace::qubit_magnon(4), model).at(0.0);
  for (int q = 0; q < 2; ++q) {
    for (int n = 0; n < 4; ++n) {
      const int i = q * 4 + n;
      EXPECT_NEAR(h(i, i).real(), model.derived.omega_M * n + (q ? 0.5 : -0.5) * model.derived.omega_Q, 1e-6);
    }
  }
}

TEST(JC, VacuumRabiSplittingAndExcitationNumber) {
  PhysicalParams p;
  p.omega_q = p.omega;  // unused by JC; the dispersive shifts set omega_Q below
  auto model = Model::make(p);
  model.derived.omega_Q = model.derived.omega_M;
  const auto space = CompositeSpace::qubit_magnon(4);
  const auto h = build_jc(space, model).evaluate(0.0);
  const auto q = qubit_ops(space);
  const auto nex = number(space, "magnon") + q.sp * q.sm;
  EXPECT_LT(max_abs(commutator(h, nex).data()), 1e-10 * max_abs(h.data()));
  const int e0 = 1 * 4 + 0, g1 = 0 * 4 + 1;
  Mat block(2, 2);
  block << h.data()(e0, e0), h.data()(e0, g1), h.data()(g1, e0), h.data()(g1, g1);
  Eigen::SelfAdjointEigenSolver<Mat> es(block, Eigen::EigenvaluesOnly);
  EXPECT_NEAR(es.eigenvalues()(1) - es.eigenvalues()(0), 2.0 * model.derived.G, 1e-6);
}

TEST(RWA1, FormulaAtModulationNode) {
  const auto model = Model::make(PhysicalParams{});
  const auto& p = model.params;
  const auto& d = model.derived;
  const auto space = CompositeSpace::qubit_magnon(5);
  const double t = kPi / (2.0 * d.omega_p);  // cos(omega_p t) = 0
  const Mat h = build_rwa1(space, model).at(t);
  const auto q = qubit_ops(space);
  const Mat m = annihilation(space, "magnon").data();
  const Mat n = number(space, "magnon").data();
  const cplx ph = std::exp(kI * d.Delta_12 * t);
  const Mat expect = d.Delta_m * n + 0.5 * d.Delta_q * q.sz.data() +
                     d.G * (q.sp.data() * m + q.sm.data() * m.adjoint()) + 0.5 * p.eta1 * q.sx.data() +
                     0.5 * p.eta2 * (ph * q.sp.data() + std::conj(ph) * q.sm.data()) + 0.5 * p.eta3 * (m + m.adjoint());
  EXPECT_LT(max_abs(h - expect), 1e-9 * max_abs(expect));
}

TEST(Rotating, ExtraTermsAreFast) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::qubit_magnon(4);
  const auto full = build_rotating(space, model);
  const auto slow = build_rwa1(space, model);
  const double floor = model.params.omega1 + model.derived.omega2;
  int extra = 0;
  for (const auto& term : full.terms()) {
    if (slow.find(term.label)) continue;
    ++extra;
    EXPECT_GE(term.carrier, floor * (1.0 - 1e-12)) << term.label;
  }
  EXPECT_EQ(extra, 6);
  EXPECT_EQ(full.terms().size(), slow.terms().size() + 6);
}

TEST(Rabi, BareQubitSplitting) {
  PhysicalParams p;
  p.eps_p = 0.0;
  p.g_q = 0.0;
  auto model = Model::make(p);
  // keep the dressed geometry of the default set; only G vanishes
  const auto ref = derive(PhysicalParams{});
  model.derived.delta_x = ref.delta_x;
  model.derived.nu = ref.nu;
  const auto space = CompositeSpace::qubit_magnon(3);
  const Mat h = build_rabi(space, model).at(0.3);
  Mat qubit(2, 2);
  qubit << h(0, 0), h(0, 3), h(3, 0), h(3, 3);
  Eigen::SelfAdjointEigenSolver<Mat> es(qubit, Eigen::EigenvaluesOnly);
  EXPECT_NEAR(es.eigenvalues()(1) - es.eigenvalues()(0), ref.nu, 1e-9 * ref.nu);
}

TEST(Rabi, LongitudinalCoefficient) {
  const auto model = Model::make(PhysicalParams{});
  const auto* term = build_rabi(CompositeSpace::qubit_magnon(3), model).find("qubit_z");
  ASSERT_NE(term, nullptr);
  EXPECT_NEAR(to_mhz(std::abs(term->op(3, 3))), 12.5, 1e-12);
}

TEST(Dressed, ConjugationReproducesRabi) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (double delta13 : {0.0, mhz(0.05)}) {
    const auto model = Model::make(PhysicalParams{}, MismatchParams{delta13, 0.0});
    const auto space = CompositeSpace::qubit_magnon(8);
    const Mat w = frame_unitary(ModelLevel::Rabi, ModelLevel::Dressed, 0.0, space, model);
    const auto rabi = build_rabi(space, model);
    const auto dressed = build_dressed(space, model);
    for (int i = 0; i < 20; ++i) {
      const double ti = t(rng);
      const Mat lhs = w * rabi.at(ti) * w.adjoint();
      EXPECT_LT(max_abs(lhs - dressed.at(ti)), 1e-10 * max_abs(lhs));
    }
  }
}

TEST(Dressed, FlippedBranchStillMatches) {
  // a large eta1 - Delta_12 offset turns delta_x positive: no magnon flip
  const auto m2 = Model::make(PhysicalParams{}, MismatchParams{0.0, mhz(50.0)});
  EXPECT_GT(m2.derived.delta_x, 0.0);
  EXPECT_FALSE(m2.derived.magnon_flip);
  const auto space = CompositeSpace::qubit_magnon(6);
  const Mat w = frame_unitary(ModelLevel::Rabi, ModelLevel::Dressed, 0.0, space, m2);
  const Mat lhs = w * build_rabi(space, m2).at(0.17) * w.adjoint();
  EXPECT_LT(max_abs(lhs - build_dressed(space, m2).at(0.17)), 1e-10 * max_abs(lhs));
  EXPECT_GT(m2.derived.g_x, 0.0);
  EXPECT_GT(m2.derived.g_z, 0.0);
  EXPECT_GT(m2.derived.dressed_drive_x, 0.0);
}

TEST(Dressed, DriveAndCouplings) {
  const auto model = Model::make(PhysicalParams{});
  const auto& d = model.derived;
  EXPECT_NEAR(d.g_x, std::sqrt(2.0) / 4.0 * d.G, 1e-4 * d.G);
  EXPECT_NEAR(d.dressed_drive_x, 2.0 * d.eps_p, 1e-6 * d.eps_p);
  EXPECT_NEAR(d.dressed_drive_z, 0.0, 1e-4 * d.eps_p);
}

TEST(Interaction, CoefficientsAtTimeZero) {
  const auto model = Model::make(PhysicalParams{});
  const auto& d = model.derived;
  const auto h = build_interaction(CompositeSpace::qubit_magnon(4), model);
  EXPECT_NEAR(std::abs(h.find("longitudinal")->value(0.0)), 1.0, 1e-15);
  const Mat sum = h.at(0.0);
  const auto space = CompositeSpace::qubit_magnon(4);
  const auto q = qubit_ops(space);
  const Mat m = annihilation(space, "magnon").data();
  const Mat expect = d.delta_m * number(space, "magnon").data() + d.g_z * ((m + m.adjoint()) * q.sz.data()) +
                     d.g_x * ((m + m.adjoint()) * q.sx.data()) + d.eps_p * q.sx.data();
  EXPECT_LT(max_abs(sum - expect), 1e-10 * max_abs(expect));
  for (const auto& term : h.terms()) {
    if (term.label != "magnon_detuning" && term.label != "drive") EXPECT_GT(term.carrier, 0.0) << term.label;
  }
}

TEST(Interaction, RequiresMatchedDrive) {
  PhysicalParams p;
  p.omega_p = mhz(30.0);
  EXPECT_THROW(build_interaction(CompositeSpace::qubit_magnon(3), Model::make(p)), std::domain_error);
}

TEST(Interaction, FrameOfDressedModelWithoutDrive) {
  PhysicalParams p;
  p.eps_p = 0.0;
  const auto model = Model::make(p);
  const auto space = CompositeSpace::qubit_magnon(6);
  const auto& d = model.derived;
  const auto q = qubit_ops(space);
  const Mat k = 0.5 * d.omega_p * (number(space, "magnon") + q.sz).data();
  for (double t : {0.0, 0.013, 0.21}) {
    const Mat u = frame_unitary(ModelLevel::Dressed, ModelLevel::Interaction, t, space, model);
    const Mat lhs = u * build_dressed(space, model).at(t) * u.adjoint() - k;
    const Mat rhs = build_interaction(space, model).at(t);
    EXPECT_LT(max_abs(lhs - rhs), 1e-10 * max_abs(rhs));
  }
}

TEST(Effective, Coefficients) {
  const auto model = Model::make(PhysicalParams{});
  const auto& d = model.derived;
  EXPECT_NEAR(to_mhz(d.stark), 0.942, 1e-3);
  const auto space = CompositeSpace::qubit_magnon(5);
  const auto h = build_effective(space, model);
  const Mat two = h.find("two_magnon")->op;
  // <up, 0| m^2 sigma+ |down, 2> carries -g_eff sqrt(2)
  EXPECT_NEAR(two(5 + 0, 2).real(), -d.g_eff * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(h.find("magnon_detuning"), nullptr);
}

TEST(Effective, ConservesParity) {
  auto model = Model::make(PhysicalParams{});
  model.include_detuning = true;
  const auto space = CompositeSpace::qubit_magnon(8);
  const auto h = build_effective(space, model).evaluate(0.0);
  const auto p = embed(space, "magnon", local_parity(8));
  EXPECT_EQ(max_abs(commutator(h, p).data()), 0.0);
  EXPECT_NE(build_effective(space, model).find("magnon_detuning"), nullptr);
}

TEST(Effective, ResidualDetuningWhenDriveOffResonance) {
  PhysicalParams p;
  auto nu = derive(p).nu;
  p.omega_p = nu - mhz(1.0);
  const auto h = build_effective(CompositeSpace::qubit_magnon(3), Model::make(p));
  ASSERT_NE(h.find("qubit_detuning"), nullptr);
}

// ---------- frames ----------

TEST(Frames, IdentityForSameFrame) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::qubit_magnon(5);
  EXPECT_EQ(max_abs(frame_unitary(ModelLevel::RWA1, ModelLevel::RWA1, 0.3, space, model) - Mat::Identity(10, 10)), 0.0);
  EXPECT_EQ(max_abs(frame_unitary(ModelLevel::Rotating, ModelLevel::RWA1, 0.3, space, model) - Mat::Identity(10, 10)), 0.0);
  EXPECT_EQ(max_abs(frame_unitary(ModelLevel::Effective, ModelLevel::Interaction, 0.3, space, model) - Mat::Identity(10, 10)),
            0.0);
}

TEST(Frames, RoundTripPreservesState) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::qubit_magnon(30);
  Vec psi = Vec::Zero(60);
  psi.tail(30) = coherent_state(30, 0.7).data().col(0);
  const auto rho = QMatrix::ket(space, psi).to_density();
  const auto there = frame_map(rho, ModelLevel::Rotating, ModelLevel::Effective, 0.123, model);
  const auto back = frame_map(there, ModelLevel::Effective, ModelLevel::Rotating, 0.123, model);
  const double f = (rho.data() * back.data()).trace().real();
  EXPECT_GT(f, 1.0 - 1e-9);
  EXPECT_LT(max_abs(back.data() - rho.data()), 1e-10);
}

TEST(Frames, NonComposablePair) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::cavity_qubit_magnon(2, 3);
  EXPECT_THROW(frame_unitary(ModelLevel::ThreeMode, ModelLevel::JC, 0.0, space, model), std::invalid_argument);
  EXPECT_NO_THROW(frame_unitary(ModelLevel::ThreeMode, ModelLevel::ThreeMode, 0.0, space, model));
}

TEST(Frames, MappedOperatorMatchesConjugation) {
  const auto model = Model::make(PhysicalParams{});
  const auto space = CompositeSpace::qubit_magnon(12);
  const auto q = qubit_ops(space);
  for (const QMatrix& op : {q.sm, q.sz, annihilation(space, "magnon")}) {
    for (ModelLevel to : {ModelLevel::Dressed, ModelLevel::Rabi, ModelLevel::RWA1, ModelLevel::JC}) {
      const auto mapped = map_operator(op, ModelLevel::Effective, to, model);
      for (double t : {0.0, 0.0371, 0.2}) {
        const Mat u = frame_unitary(ModelLevel::Effective, to, t, space, model);
        const Mat direct = u * op.data() * u.adjoint();
        EXPECT_LT(max_abs(mapped.at(t) - direct), 1e-9) << to_string(to);
      }
    }
  }
}

TEST(Levels, NamesRoundTrip) {
  for (ModelLevel level : kTwoBodyLevels) EXPECT_EQ(parse_level(to_string(level)), level);
  EXPECT_EQ(parse_level("THREE_MODE"), ModelLevel::ThreeMode);
  EXPECT_THROW(parse_level("FULL"), std::invalid_argument);
}
