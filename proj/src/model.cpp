#include "magcat/model.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace magcat {

namespace {

void require_qubit_magnon(const SpacePtr& space, const char* who) {
  const auto& f = space->factors();
  if (f.size() != 2 || f[0].label != "qubit" || f[0].dim != 2 || f[1].label != "magnon") {
    throw SpaceError(std::string(who) + " expects a [qubit(2), magnon(N)] space");
  }
}

double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

void PhysicalParams::validate() const {
  const std::pair<const char*, double> nonneg[] = {
      {"omega_c", omega_c}, {"omega", omega},         {"g_q", g_q},     {"g_m", g_m},
      {"eta1", eta1},       {"eta2", eta2},           {"eta3", eta3},   {"eps_p", eps_p},
      {"omega1", omega1},   {"gamma", gamma},         {"kappa", kappa}, {"gamma_phi", gamma_phi}};
  for (const auto& [name, v] : nonneg) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(name) + " must be a finite nonnegative value");
  }
  for (const auto& [name, v] : {std::pair{"omega2", omega2}, {"omega3", omega3}, {"omega_p", omega_p}, {"omega_q", omega_q},
                                {"omega_m", omega_m}}) {
    if (v && (!std::isfinite(*v) || *v < 0.0)) throw std::invalid_argument(std::string(name) + " must be a finite nonnegative value");
  }
}

DerivedParams derive(const PhysicalParams& p, const MismatchParams& mm) {
  p.validate();
  DerivedParams d;
  d.Delta = p.omega_c - p.omega;
  if (d.Delta == 0.0) throw std::domain_error("cavity detuning Delta = omega_c - omega vanishes");
  d.omega_Q = p.omega + p.g_q * p.g_q / d.Delta;
  d.omega_M = p.omega + p.g_m * p.g_m / d.Delta;
  d.G = p.g_q * p.g_m / d.Delta;

  d.omega2 = p.omega2.value_or(p.omega1 - p.eta1) + mm.deta12;
  d.omega3 = p.omega3.value_or(p.omega1) - mm.delta13;
  d.Delta_m = d.omega_M - p.omega1;
  d.Delta_q = d.omega_Q - p.omega1;
  d.Delta_12 = p.omega1 - d.omega2;
  d.Delta_13 = p.omega1 - d.omega3;

  const double denom = d.Delta_m - mm.delta13;
  if (denom == 0.0) throw std::domain_error("magnon detuning Delta_m - delta13 vanishes");
  d.delta_z = p.eta2 / 2.0;
  // the residual eta1 - Delta_12 survives the interaction picture as a sigma_x term
  d.delta_x = -p.eta3 * d.G / denom + (p.eta1 - d.Delta_12);
  d.nu = std::hypot(d.delta_z, d.delta_x);
  if (d.nu == 0.0) throw std::domain_error("dressed splitting nu vanishes");
  d.theta = std::atan2(d.delta_z, std::abs(d.delta_x));
  d.g_x = 0.5 * d.G * std::sin(d.theta);
  d.g_z = 0.5 * d.G * std::cos(d.theta);
  d.g_eff = 4.0 * d.g_x * d.g_z / d.nu;
  d.stark = 8.0 * d.g_x * d.g_x / (3.0 * d.nu);
  d.omega_p = p.omega_p.value_or(d.nu);
  d.delta_m = d.Delta_m - d.omega_p / 2.0;
  d.displacement = -p.eta3 / (2.0 * denom);

  d.n_x = d.delta_x / d.nu;
  d.n_z = d.delta_z / d.nu;
  const double s_m = sign_or_one(d.delta_x);
  d.magnon_flip = s_m < 0.0;
  d.p_x = s_m * d.n_z;
  d.p_z = -s_m * d.n_x;

  // Rabi-level drive eps cos(omega_p t)(sigma_x + sigma_z); its phase is chosen
  // so that the dressed sigma_x drive comes out positive.
  const double x_proj = d.p_x + d.p_z;
  const double drive_sign = sign_or_one(x_proj);
  d.eps_p = p.eps_p;
  d.eps = drive_sign * std::sqrt(2.0) * p.eps_p;
  d.eps1 = 2.0 * d.eps;
  d.eps2 = 4.0 * d.eps;
  d.dressed_drive_x = d.eps * x_proj;
  d.dressed_drive_z = d.eps * (d.n_x + d.n_z);
  d.alpha = std::sqrt(cplx(d.eps_p / d.g_eff, 0.0));
  return d;
}

DerivedParams with_g_eff(DerivedParams d, double g_eff) {
  if (!(g_eff > 0.0)) throw std::invalid_argument("g_eff override must be positive");
  d.g_eff = g_eff;
  d.alpha = std::sqrt(cplx(d.eps_p / g_eff, 0.0));
  return d;
}

PhysicalParams resonant_detuning_variant(const PhysicalParams& params) {
  const DerivedParams d = derive(params);
  PhysicalParams out = params;
  const double delta_x = -params.eta3 * d.G / d.Delta_m;
  const double Delta_m = d.nu / 2.0;
  out.omega1 = d.omega_M - Delta_m;
  out.eta3 = -delta_x * Delta_m / d.G;
  out.omega2.reset();
  out.omega3.reset();
  out.omega_p.reset();
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(ModelLevel level) {
  switch (level) {
    case ModelLevel::ThreeMode: return "THREE_MODE";
    case ModelLevel::JC: return "JC";
    case ModelLevel::Rotating: return "ROTATING";
    case ModelLevel::RWA1: return "RWA1";
    case ModelLevel::Rabi: return "RABI";
    case ModelLevel::Dressed: return "DRESSED";
    case ModelLevel::Interaction: return "INTERACTION";
    case ModelLevel::Effective: return "EFFECTIVE";
  }
  return "?";
}

ModelLevel parse_level(const std::string& name) {
  for (auto l : {ModelLevel::ThreeMode, ModelLevel::JC, ModelLevel::Rotating, ModelLevel::RWA1, ModelLevel::Rabi,
                 ModelLevel::Dressed, ModelLevel::Interaction, ModelLevel::Effective}) {
    if (to_string(l) == name) return l;
  }
  throw std::invalid_argument("unknown model level '" + name + "'");
}

bool is_time_dependent(ModelLevel level) {
  switch (level) {
    case ModelLevel::ThreeMode:
    case ModelLevel::JC:
    case ModelLevel::Effective:
      return false;
    default:
      return true;
  }
}

Model Model::make(const PhysicalParams& params, const MismatchParams& mismatch) {
  return Model{params, mismatch, derive(params, mismatch), false};
}

// ---------------------------------------------------------------------------

void TaggedOperator::add(std::string label, const QMatrix& op, std::function<cplx(double)> envelope, double carrier,
                         double bandwidth) {
  if (!(*op.space() == *space_)) throw SpaceError("term '" + label + "' lives on a different space");
  terms_.push_back(Term{std::move(label), op.data(), std::move(envelope), std::abs(carrier), std::abs(bandwidth)});
}

void TaggedOperator::add(Term term) {
  if (term.op.rows() != dim() || term.op.cols() != dim()) throw SpaceError("term '" + term.label + "' has the wrong shape");
  terms_.push_back(std::move(term));
}

bool TaggedOperator::time_dependent() const {
  for (const auto& t : terms_) {
    if (t.envelope) return true;
  }
  return false;
}

double TaggedOperator::fastest_frequency() const {
  double w = 0.0;
  for (const auto& t : terms_) w = std::max(w, t.max_frequency());
  return w;
}

void TaggedOperator::at(double t, Mat& out) const {
  out.setZero(dim(), dim());
  for (const auto& term : terms_) {
    if (term.envelope) {
      out.noalias() += term.envelope(t) * term.op;
    } else {
      out += term.op;
    }
  }
}

Mat TaggedOperator::at(double t) const {
  Mat out;
  at(t, out);
  return out;
}

const Term* TaggedOperator::find(const std::string& label) const {
  for (const auto& t : terms_) {
    if (t.label == label) return &t;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

std::function<cplx(double)> phase(double w, double phi = 0.0) {
  return [w, phi](double t) { return std::exp(kI * (w * t + phi)); };
}

std::function<cplx(double)> cosine(double amp, double w) {
  return [amp, w](double t) { return cplx(amp * std::cos(w * t), 0.0); };
}

// (eta + eps cos(wp t)) / 2 * exp(i (w t + phi))
std::function<cplx(double)> modulated_phase(double eta, double eps, double wp, double w, double phi) {
  return [=](double t) { return 0.5 * (eta + eps * std::cos(wp * t)) * std::exp(kI * (w * t + phi)); };
}

struct Ops {
  QMatrix m, md, n, sz, sp, sm, sx;
};

Ops ops_for(const SpacePtr& space) {
  const QMatrix m = annihilation(space, "magnon");
  const auto q = qubit_ops(space);
  return Ops{m, m.adjoint(), number(space, "magnon"), q.sz, q.sp, q.sm, q.sx};
}

// Shared slow part of the rotating-frame Hamiltonian (everything kept by the first RWA).
void add_slow_rotating_terms(Hamiltonian& h, const Ops& o, const Model& model) {
  const auto& p = model.params;
  const auto& d = model.derived;
  h.add("magnon_detuning", d.Delta_m * o.n);
  h.add("qubit_detuning", (0.5 * d.Delta_q) * o.sz);
  h.add("jc_coupling", d.G * (o.sp * o.m + o.sm * o.md));
  // (eta~1 / 2)(sigma+ e^{-i phi1} + h.c.), split into static and modulated parts
  h.add("drive1_static", (0.5 * p.eta1) * (std::exp(-kI * p.phi1) * o.sp + std::exp(kI * p.phi1) * o.sm));
  if (d.eps1 != 0.0) {
    const QMatrix sx_phi = std::exp(-kI * p.phi1) * o.sp + std::exp(kI * p.phi1) * o.sm;
    h.add("drive1_modulation", sx_phi, cosine(0.5 * d.eps1, d.omega_p), 0.0, d.omega_p);
  }
  h.add("drive2", o.sp, modulated_phase(p.eta2, d.eps2, d.omega_p, d.Delta_12, -p.phi2), d.Delta_12, d.omega_p);
  h.add("drive2_hc", o.sm, modulated_phase(p.eta2, d.eps2, d.omega_p, -d.Delta_12, p.phi2), d.Delta_12, d.omega_p);
  if (d.Delta_13 == 0.0 && p.phi3 == 0.0) {
    h.add("drive3", (0.5 * p.eta3) * (o.md + o.m));
  } else {
    h.add("drive3", (0.5 * p.eta3) * o.md, phase(d.Delta_13, -p.phi3), d.Delta_13);
    h.add("drive3_hc", (0.5 * p.eta3) * o.m, phase(-d.Delta_13, p.phi3), d.Delta_13);
  }
}

}  // namespace

Hamiltonian build_three_mode(const SpacePtr& space, const Model& model) {
  const auto& f = space->factors();
  if (f.size() != 3 || f[0].label != "cavity" || f[1].label != "qubit" || f[2].label != "magnon" || f[1].dim != 2) {
    throw SpaceError("three-mode model expects a [cavity, qubit(2), magnon] space");
  }
  const auto& p = model.params;
  const QMatrix c = annihilation(space, "cavity");
  const QMatrix m = annihilation(space, "magnon");
  const auto q = qubit_ops(space);
  Hamiltonian h(space);
  h.add("cavity", p.omega_c * number(space, "cavity"));
  h.add("qubit", (0.5 * p.omega_q.value_or(p.omega)) * q.sz);
  h.add("magnon", p.omega_m.value_or(p.omega) * number(space, "magnon"));
  h.add("cavity_qubit", p.g_q * (c * q.sp + c.adjoint() * q.sm));
  h.add("cavity_magnon", p.g_m * (c * m.adjoint() + c.adjoint() * m));
  return h;
}

Hamiltonian build_jc(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "JC model");
  const auto o = ops_for(space);
  const auto& d = model.derived;
  Hamiltonian h(space);
  h.add("magnon", d.omega_M * o.n);
  h.add("qubit", (0.5 * d.omega_Q) * o.sz);
  h.add("jc_coupling", d.G * (o.sp * o.m + o.sm * o.md));
  return h;
}

Hamiltonian build_rwa1(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "RWA1 model");
  const auto o = ops_for(space);
  Hamiltonian h(space);
  add_slow_rotating_terms(h, o, model);
  return h;
}

Hamiltonian build_rotating(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "rotating-frame model");
  const auto o = ops_for(space);
  const auto& p = model.params;
  const auto& d = model.derived;
  Hamiltonian h(space);
  add_slow_rotating_terms(h, o, model);
  const double w11 = 2.0 * p.omega1;
  const double w12 = p.omega1 + d.omega2;
  const double w13 = p.omega1 + d.omega3;
  h.add("drive1_fast", o.sp, modulated_phase(p.eta1, d.eps1, d.omega_p, w11, p.phi1), w11, d.omega_p);
  h.add("drive1_fast_hc", o.sm, modulated_phase(p.eta1, d.eps1, d.omega_p, -w11, -p.phi1), w11, d.omega_p);
  h.add("drive2_fast", o.sp, modulated_phase(p.eta2, d.eps2, d.omega_p, w12, p.phi2), w12, d.omega_p);
  h.add("drive2_fast_hc", o.sm, modulated_phase(p.eta2, d.eps2, d.omega_p, -w12, -p.phi2), w12, d.omega_p);
  h.add("drive3_fast", (0.5 * p.eta3) * o.md, phase(w13, p.phi3), w13);
  h.add("drive3_fast_hc", (0.5 * p.eta3) * o.m, phase(-w13, -p.phi3), w13);
  return h;
}

Hamiltonian build_rabi(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "Rabi model");
  const auto o = ops_for(space);
  const auto& d = model.derived;
  Hamiltonian h(space);
  h.add("qubit_z", (0.5 * d.delta_z) * o.sz);
  h.add("qubit_x", (0.5 * d.delta_x) * o.sx);
  h.add("magnon_detuning", d.Delta_m * o.n);
  h.add("rabi_coupling", (0.5 * d.G) * ((o.md + o.m) * o.sx));
  if (d.eps != 0.0) h.add("drive", o.sx + o.sz, cosine(d.eps, d.omega_p), 0.0, d.omega_p);
  return h;
}

Hamiltonian build_dressed(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "dressed model");
  const auto o = ops_for(space);
  const auto& d = model.derived;
  Hamiltonian h(space);
  h.add("qubit", (0.5 * d.nu) * o.sz);
  h.add("magnon_detuning", d.Delta_m * o.n);
  h.add("longitudinal", d.g_z * ((o.md + o.m) * o.sz));
  h.add("transverse", d.g_x * ((o.md + o.m) * o.sx));
  if (d.dressed_drive_x != 0.0) h.add("drive", o.sx, cosine(d.dressed_drive_x, d.omega_p), 0.0, d.omega_p);
  if (std::abs(d.dressed_drive_z) > 1e-12 * std::abs(d.dressed_drive_x)) {
    h.add("drive_z", o.sz, cosine(d.dressed_drive_z, d.omega_p), 0.0, d.omega_p);
  }
  return h;
}

Hamiltonian build_interaction(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "interaction-frame model");
  const auto& d = model.derived;
  if (std::abs(d.omega_p - d.nu) > 1e-9 * d.nu) throw std::domain_error("interaction frame requires omega_p = nu");
  const auto o = ops_for(space);
  const double nu = d.nu;
  Hamiltonian h(space);
  h.add("magnon_detuning", d.delta_m * o.n);
  h.add("longitudinal", d.g_z * (o.m * o.sz), phase(-nu / 2.0), nu / 2.0);
  h.add("longitudinal_hc", d.g_z * (o.md * o.sz), phase(nu / 2.0), nu / 2.0);
  h.add("transverse_m_sp", d.g_x * (o.m * o.sp), phase(nu / 2.0), nu / 2.0);
  h.add("transverse_md_sp", d.g_x * (o.md * o.sp), phase(1.5 * nu), 1.5 * nu);
  h.add("transverse_m_sm", d.g_x * (o.m * o.sm), phase(-1.5 * nu), 1.5 * nu);
  h.add("transverse_md_sm", d.g_x * (o.md * o.sm), phase(-nu / 2.0), nu / 2.0);
  h.add("drive", d.eps_p * o.sx);
  return h;
}

Hamiltonian build_effective(const SpacePtr& space, const Model& model) {
  require_qubit_magnon(space, "effective model");
  const auto o = ops_for(space);
  const auto& d = model.derived;
  const QMatrix up = o.sp * o.sm;
  Hamiltonian h(space);
  h.add("stark", d.stark * (up + 2.0 * (o.n * up)));
  h.add("two_magnon", -d.g_eff * (o.m * o.m * o.sp + o.md * o.md * o.sm));
  h.add("drive", d.eps_p * o.sx);
  if (model.include_detuning) h.add("magnon_detuning", d.delta_m * o.n);
  // drive detuned from the dressed splitting (mismatch sweeps hold omega_p fixed)
  const double residual = d.nu - d.omega_p;
  if (std::abs(residual) > 1e-12 * d.nu) h.add("qubit_detuning", (0.5 * residual) * o.sz);
  return h;
}

Hamiltonian build(ModelLevel level, const SpacePtr& space, const Model& model) {
  switch (level) {
    case ModelLevel::ThreeMode: return build_three_mode(space, model);
    case ModelLevel::JC: return build_jc(space, model);
    case ModelLevel::Rotating: return build_rotating(space, model);
    case ModelLevel::RWA1: return build_rwa1(space, model);
    case ModelLevel::Rabi: return build_rabi(space, model);
    case ModelLevel::Dressed: return build_dressed(space, model);
    case ModelLevel::Interaction: return build_interaction(space, model);
    case ModelLevel::Effective: return build_effective(space, model);
  }
  throw std::invalid_argument("unknown model level");
}

// ---------------------------------------------------------------------------
// Frames. Rank 0: lab (JC). 1: rotating frame of omega1 (ROTATING, RWA1).
// 2: interaction picture of the static drive plus displacement (RABI).
// 3: dressed basis (DRESSED). 4: rotating frame of omega_p / 2 (INTERACTION, EFFECTIVE).

Mat dressed_rotation(const DerivedParams& d) {
  // up = +1 eigenvector of n.sigma, written in the (g, e) index basis
  const double chi = std::atan2(d.n_x, d.n_z);
  Eigen::Vector2cd up(std::sin(chi / 2.0), std::cos(chi / 2.0));
  Mat psig(2, 2);
  psig << -d.p_z, d.p_x, d.p_x, d.p_z;  // p_x sigma_x + p_z sigma_z, with sigma_z = diag(-1, 1)
  Eigen::Vector2cd down = psig * up;
  Mat v(2, 2);
  v.row(0) = down.adjoint();
  v.row(1) = up.adjoint();
  return v;
}

namespace {

int frame_rank(ModelLevel level) {
  switch (level) {
    case ModelLevel::ThreeMode: return -1;
    case ModelLevel::JC: return 0;
    case ModelLevel::Rotating:
    case ModelLevel::RWA1: return 1;
    case ModelLevel::Rabi: return 2;
    case ModelLevel::Dressed: return 3;
    case ModelLevel::Interaction:
    case ModelLevel::Effective: return 4;
  }
  return -1;
}

/// exp(i K t) for Hermitian K, stored through its eigen-decomposition.
struct Rotation {
  Eigen::VectorXd lambda;
  Mat vectors;

  explicit Rotation(const Mat& k) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (k + k.adjoint()));
    lambda = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  Mat unitary(double t) const {
    Vec ph(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) ph(i) = std::exp(kI * lambda(i) * t);
    return vectors * ph.asDiagonal() * vectors.adjoint();
  }
};

struct Stage {
  std::optional<Rotation> rotation;  // applied first
  std::optional<Mat> constant;       // then this
};

/// Stage taking frame rank r-1 to rank r.
Stage stage(int r, const SpacePtr& space, const Model& model) {
  const auto& d = model.derived;
  const auto q = qubit_ops(space);
  const QMatrix n = number(space, "magnon");
  const int nm = space->dim_of("magnon");
  Stage s;
  switch (r) {
    case 1:
      s.rotation.emplace((model.params.omega1 * (n + 0.5 * q.sz)).data());
      break;
    case 2:
      s.rotation.emplace(((0.5 * d.Delta_12) * q.sx).data());
      s.constant = embed(space, "magnon", Mat(displacement_matrix(nm, d.displacement).adjoint())).data();
      break;
    case 3: {
      const Mat pm = d.magnon_flip ? local_parity(nm) : Mat::Identity(nm, nm);
      s.constant = embed_many(space, {{"qubit", dressed_rotation(d)}, {"magnon", pm}}).data();
      break;
    }
    case 4:
      s.rotation.emplace(((0.5 * d.omega_p) * (n + q.sz)).data());
      break;
    default:
      throw std::logic_error("bad frame stage");
  }
  return s;
}

void check_composable(ModelLevel from, ModelLevel to, const SpacePtr& space) {
  const int rf = frame_rank(from), rt = frame_rank(to);
  if ((rf < 0 || rt < 0) && from != to) {
    throw std::invalid_argument("frames " + to_string(from) + " and " + to_string(to) + " are not composable");
  }
  if (rf >= 0 && from != to) require_qubit_magnon(space, "frame map");
}

}  // namespace

Mat frame_unitary(ModelLevel from, ModelLevel to, double t, const SpacePtr& space, const Model& model) {
  check_composable(from, to, space);
  const int n = space->total_dim();
  const int rf = frame_rank(from), rt = frame_rank(to);
  Mat u = Mat::Identity(n, n);
  if (from == to || rf == rt) return u;
  const int lo = std::min(rf, rt), hi = std::max(rf, rt);
  for (int r = lo + 1; r <= hi; ++r) {
    const Stage s = stage(r, space, model);
    if (s.rotation) u = s.rotation->unitary(t) * u;
    if (s.constant) u = (*s.constant) * u;
  }
  return rf < rt ? u : Mat(u.adjoint());
}

QMatrix frame_map(const QMatrix& state, ModelLevel from, ModelLevel to, double t, const Model& model) {
  const Mat u = frame_unitary(from, to, t, state.space(), model);
  if (state.kind() == Kind::Ket) return QMatrix(state.space(), u * state.data(), Kind::Ket);
  return QMatrix(state.space(), u * state.data() * u.adjoint(), state.kind());
}

namespace {

// e^{i s K t} A e^{-i s K t} for every tagged term, split by frequency.
TaggedOperator rotate_terms(const TaggedOperator& in, const Rotation& rot, double sgn) {
  TaggedOperator out(in.space());
  const Mat& v = rot.vectors;
  const Eigen::Index n = rot.lambda.size();
  for (const auto& term : in.terms()) {
    const Mat a = v.adjoint() * term.op * v;
    const double scale = a.cwiseAbs().maxCoeff();
    std::map<long long, Mat> buckets;
    std::map<long long, double> freq;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(a(i, j)) <= 1e-14 * scale) continue;
        const double w = sgn * (rot.lambda(i) - rot.lambda(j));
        const long long key = std::llround(w * 1e6);
        auto it = buckets.find(key);
        if (it == buckets.end()) {
          it = buckets.emplace(key, Mat::Zero(n, n)).first;
          freq[key] = w;
        }
        it->second(i, j) = a(i, j);
      }
    }
    for (auto& [key, block] : buckets) {
      const double w = freq[key];
      Term t;
      t.label = term.label;
      t.op = v * block * v.adjoint();
      if (key == 0) {
        t.envelope = term.envelope;
      } else {
        auto inner = term.envelope;
        t.envelope = [inner, w](double time) { return (inner ? inner(time) : cplx(1.0)) * std::exp(kI * w * time); };
      }
      t.carrier = term.carrier + std::abs(w);
      t.bandwidth = term.bandwidth;
      out.add(std::move(t));
    }
  }
  return out;
}

TaggedOperator conjugate_terms(const TaggedOperator& in, const Mat& u) {
  TaggedOperator out(in.space());
  for (auto term : in.terms()) {
    term.op = u * term.op * u.adjoint();
    out.add(std::move(term));
  }
  return out;
}

}  // namespace

TaggedOperator map_operator(const QMatrix& op, ModelLevel from, ModelLevel to, const Model& model) {
  const auto& space = op.space();
  check_composable(from, to, space);
  TaggedOperator out(space);
  out.add("mapped", op);
  const int rf = frame_rank(from), rt = frame_rank(to);
  if (from == to || rf == rt) return out;
  if (rf < rt) {
    for (int r = rf + 1; r <= rt; ++r) {
      const Stage s = stage(r, space, model);
      if (s.rotation) out = rotate_terms(out, *s.rotation, 1.0);
      if (s.constant) out = conjugate_terms(out, *s.constant);
    }
  } else {
    for (int r = rf; r > rt; --r) {
      const Stage s = stage(r, space, model);
      if (s.constant) out = conjugate_terms(out, Mat(s.constant->adjoint()));
      if (s.rotation) out = rotate_terms(out, *s.rotation, -1.0);
    }
  }
  return out;
}

}  // namespace magcat
