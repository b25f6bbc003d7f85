#include "magcat/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace magcat {

namespace {

SpMat to_sparse(const Mat& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  return m.sparseView(1.0, 1e-15 * std::max(scale, 1e-300));
}

/// Magnon parity of each basis index, or empty if there is no magnon factor.
std::vector<int> magnon_parity(const CompositeSpace& space) {
  if (!space.has("magnon")) return {};
  const std::size_t k = space.index_of("magnon");
  const int dk = space.factors()[k].dim;
  const int sk = space.stride(k);
  std::vector<int> p(space.total_dim());
  for (int i = 0; i < space.total_dim(); ++i) p[i] = ((i / sk) % dk) % 2;
  return p;
}

/// +1 if op preserves magnon parity, -1 if it flips it, 0 if neither.
int parity_class(const Mat& op, const std::vector<int>& p) {
  bool even = false, odd = false;
  const double scale = op.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    for (Eigen::Index i = 0; i < op.rows(); ++i) {
      if (std::abs(op(i, j)) <= 1e-13 * scale) continue;
      (p[i] == p[j] ? even : odd) = true;
    }
  }
  if (even && odd) return 0;
  return odd ? -1 : 1;
}

int combine(int a, int b) {
  if (a == 0 || b == 0) return 0;
  if (a == 1) return b;
  if (b == 1) return a;
  return -1;
}

}  // namespace

std::vector<LindbladTerm> standard_terms(const SpacePtr& space, const Rates& rates) {
  if (rates.gamma < 0.0 || rates.gamma_phi < 0.0 || rates.kappa < 0.0) throw std::invalid_argument("rates must be nonnegative");
  const auto q = qubit_ops(space);
  std::vector<LindbladTerm> out;
  auto push = [&](const char* label, const QMatrix& op, double rate) {
    if (rate <= 0.0) return;
    TaggedOperator t(space);
    t.add(label, op);
    out.push_back(LindbladTerm{label, std::move(t), rate});
  };
  push("decay", q.sm, rates.gamma);
  push("dephasing", q.sz, rates.gamma_phi / 2.0);
  push("magnon_loss", annihilation(space, "magnon"), rates.kappa);
  return out;
}

std::vector<LindbladTerm> dissipators(ModelLevel level, const SpacePtr& space, const Model& model, const Rates& rates) {
  if (level == ModelLevel::ThreeMode) throw std::invalid_argument("no dissipators are defined for the three-mode model");
  auto terms = standard_terms(space, rates);
  for (auto& term : terms) {
    const QMatrix op(space, term.op.terms().front().op);
    TaggedOperator mapped = map_operator(op, ModelLevel::Effective, level, model);
    if (mapped.terms().size() == 1) {
      // a pure phase on a single collapse operator leaves the dissipator unchanged
      Term only = mapped.terms().front();
      only.envelope = {};
      only.carrier = 0.0;
      only.bandwidth = 0.0;
      mapped = TaggedOperator(space);
      mapped.add(std::move(only));
    }
    term.op = std::move(mapped);
  }
  return terms;
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(const Hamiltonian& h, const std::vector<LindbladTerm>& terms) : space_(h.space()), dim_(h.dim()) {
  const auto parity = magnon_parity(*space_);
  Grading grading;
  Mat hc = Mat::Zero(dim_, dim_);
  for (const auto& term : h.terms()) {
    if (!parity.empty()) grading.hamiltonian = combine(grading.hamiltonian, parity_class(term.op, parity));
    if (term.envelope) {
      h_td_.push_back(Component{to_sparse(term.op), term.envelope});
    } else {
      hc += term.op;
    }
  }
  fastest_ = h.fastest_frequency();
  for (const auto& lt : terms) {
    if (lt.rate < 0.0) throw std::invalid_argument("collapse rate for '" + lt.label + "' is negative");
    if (!(*lt.op.space() == *space_)) throw SpaceError("collapse operator '" + lt.label + "' lives on a different space");
    if (lt.rate == 0.0 || lt.op.terms().empty()) continue;
    fastest_ = std::max(fastest_, lt.op.fastest_frequency());
    if (!parity.empty()) {
      int cls = 1;
      for (const auto& term : lt.op.terms()) cls = combine(cls, parity_class(term.op, parity));
      // the dissipator is graded only if every component shares one class
      grading.dissipators = combine(grading.dissipators, cls);
    }
    Dissipator d;
    d.rate = lt.rate;
    if (!lt.op.time_dependent()) {
      const Mat l = lt.op.at(0.0);
      d.l = to_sparse(l);
      d.ladj = to_sparse(l.adjoint());
      hc -= (0.5 * kI * lt.rate) * (l.adjoint() * l);
      l_const_.push_back(std::move(d));
    } else {
      for (const auto& term : lt.op.terms()) {
        d.parts.push_back(Component{to_sparse(term.op), term.envelope});
      }
      l_td_.push_back(std::move(d));
    }
  }
  hc_ = to_sparse(hc);
  hc_adj_ = to_sparse(hc.adjoint());
  if (!parity.empty()) grading_ = grading;
}

void Liouvillian::apply(double t, const Mat& rho, Mat& out) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw SpaceError("density shape does not match the generator");
  out.noalias() = (-kI) * (hc_ * rho);
  out.noalias() += kI * (rho * hc_adj_);
  for (const auto& c : h_td_) {
    const cplx v = -kI * c.envelope(t);
    out.noalias() += v * (c.op * rho);
    out.noalias() -= v * (rho * c.op);
  }
  const double jump_sign = fault_ ? -1.0 : 1.0;
  for (const auto& d : l_const_) {
    out.noalias() += (jump_sign * d.rate) * (d.l * (rho * d.ladj));
  }
  for (const auto& d : l_td_) {
    SpMat l(dim_, dim_);
    for (const auto& c : d.parts) l += (c.envelope ? c.envelope(t) : cplx(1.0)) * c.op;
    const SpMat ladj = l.adjoint();
    const Mat lr = l * rho;
    const Mat rl = rho * ladj;
    out.noalias() += (jump_sign * d.rate) * (lr * ladj);
    out.noalias() -= (0.5 * d.rate) * (ladj * lr);
    out.noalias() -= (0.5 * d.rate) * (rl * l);
  }
}

Mat Liouvillian::apply(double t, const Mat& rho) const {
  Mat out;
  apply(t, rho, out);
  return out;
}

// ---------------------------------------------------------------------------

void EvolveConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (dt < 0.0 || max_step < 0.0 || min_step < 0.0) throw std::invalid_argument("step controls must be nonnegative");
  for (const auto* grid : {&output_times, &snapshot_times}) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double v = (*grid)[i];
      if (!(v >= 0.0 && v <= t_end * (1.0 + 1e-12))) throw std::invalid_argument("output time outside [0, t_end]");
      if (i > 0 && v < (*grid)[i - 1]) throw std::invalid_argument("output times must be sorted");
    }
  }
}

EvolveConfig EvolveConfig::uniform(double t_end, int n) {
  if (n < 1) throw std::invalid_argument("output grid needs at least one interval");
  EvolveConfig cfg;
  cfg.t_end = t_end;
  cfg.output_times.resize(n + 1);
  for (int i = 0; i <= n; ++i) cfg.output_times[i] = t_end * i / n;
  return cfg;
}

namespace {

struct MagnonObservables {
  Mat m, x1, x2, parity;
};

MagnonObservables magnon_observables(int n) {
  const Mat a = local_annihilation(n);
  const double s = 1.0 / std::sqrt(2.0);
  return MagnonObservables{a, s * (a + a.adjoint()), (kI * s) * (a.adjoint() - a), local_parity(n)};
}

double real_trace(const Mat& a, const Mat& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }

class Recorder {
 public:
  Recorder(const SpacePtr& space, const EvolveConfig& cfg, const Observer& obs, Trajectory& tr)
      : space_(space), cfg_(cfg), obs_(obs), tr_(tr) {
    has_magnon_ = space->has("magnon");
    has_qubit_ = space->has("qubit") && space->dim_of("qubit") == 2;
    if (has_magnon_) ops_ = magnon_observables(space->dim_of("magnon"));
    if (has_qubit_) {
      const auto q = qubit_ops(space);
      excited_ = (q.sp * q.sm).data();
    }
    std::vector<double> all = cfg.output_times;
    all.insert(all.end(), cfg.snapshot_times.begin(), cfg.snapshot_times.end());
    std::sort(all.begin(), all.end());
    for (double t : all) {
      if (checkpoints_.empty() || t - checkpoints_.back() > 1e-12 * std::max(1.0, cfg.t_end)) checkpoints_.push_back(t);
    }
    if (checkpoints_.empty() || checkpoints_.back() < cfg.t_end * (1.0 - 1e-12)) checkpoints_.push_back(cfg.t_end);
  }

  const std::vector<double>& checkpoints() const { return checkpoints_; }

  /// Gate measurements, re-symmetrization, then observables.
  void record(double t, Mat& rho) {
    auto& d = tr_.diagnostics;
    d.max_trace_drift = std::max(d.max_trace_drift, std::abs(rho.trace() - 1.0));
    d.max_hermiticity_drift = std::max(d.max_hermiticity_drift, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const bool is_output = matches(cfg_.output_times, t);
    const bool is_snapshot = matches(cfg_.snapshot_times, t);
    if (!is_output && !is_snapshot) return;
    d.min_eigenvalue = std::min(d.min_eigenvalue, min_eigenvalue(rho));
    const Mat framed = obs_.frame ? obs_.frame(t, rho) : rho;
    if (is_snapshot) tr_.snapshots.emplace_back(t, QMatrix(space_, framed, Kind::Operator));
    if (!is_output) return;
    tr_.times.push_back(t);
    tr_.gamma_t.push_back(obs_.gamma * t);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (has_qubit_) {
      tr_.p_excited.push_back(real_trace(framed, excited_));
    } else {
      tr_.p_excited.push_back(nan);
    }
    if (!has_magnon_) {
      for (auto* v : {&tr_.fidelity, &tr_.parity, &tr_.n_mean, &tr_.var_x1, &tr_.var_x2}) v->push_back(nan);
      return;
    }
    const Mat rm = partial_trace(QMatrix(space_, framed), "magnon").data();
    tr_.fidelity.push_back(obs_.target ? real_trace(obs_.target->data(), rm) : nan);
    tr_.parity.push_back(real_trace(rm, ops_.parity));
    tr_.n_mean.push_back(real_trace(rm, ops_.m.adjoint() * ops_.m));
    auto var = [&](const Mat& x) {
      const double m1 = real_trace(rm, x);
      return real_trace(rm, x * x) - m1 * m1;
    };
    tr_.var_x1.push_back(var(ops_.x1));
    tr_.var_x2.push_back(var(ops_.x2));
  }

 private:
  bool matches(const std::vector<double>& grid, double t) const {
    const double tol = 1e-12 * std::max(1.0, cfg_.t_end);
    return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - t) <= tol; });
  }

  SpacePtr space_;
  const EvolveConfig& cfg_;
  const Observer& obs_;
  Trajectory& tr_;
  bool has_magnon_ = false, has_qubit_ = false;
  MagnonObservables ops_;
  Mat excited_;
  std::vector<double> checkpoints_;
};

double error_norm(const Mat& err, const Mat& y0, const Mat& y1, double atol, double rtol) {
  double acc = 0.0;
  const Eigen::Index n = err.size();
  const cplx* e = err.data();
  const cplx* a = y0.data();
  const cplx* b = y1.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    const double r = std::abs(e[i]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double step_ceiling(const Liouvillian& gen, const EvolveConfig& cfg) {
  if (cfg.max_step > 0.0) return cfg.max_step;
  const double w = gen.fastest_frequency();
  if (w > 0.0) return (2.0 * kPi / w) / 40.0;
  return std::numeric_limits<double>::infinity();
}

void integrate_rk45(const Liouvillian& gen, const EvolveConfig& cfg, Mat& y, Recorder& rec, Trajectory& tr) {
  // Dormand-Prince 5(4)
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                   e7 = -1.0 / 40;
  constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9;

  auto& diag = tr.diagnostics;
  const double hmax = step_ceiling(gen, cfg);
  const int n = gen.dim();
  Mat k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n), tmp(n, n), ynew(n, n), err(n, n);

  double t = 0.0;
  auto eval = [&](double tt, const Mat& yy, Mat& out) {
    gen.apply(tt, yy, out);
    ++diag.rhs_evals;
  };
  eval(t, y, k1);
  double h;
  {
    const double fy = k1.cwiseAbs().maxCoeff();
    const double yn = y.cwiseAbs().maxCoeff();
    h = fy > 0.0 ? 0.01 * yn / fy : cfg.t_end;
    h = std::min({h, hmax, cfg.t_end});
  }
  const auto& cps = rec.checkpoints();
  std::size_t next = 0;
  if (!cps.empty() && cps[0] <= 0.0) {
    rec.record(0.0, y);
    eval(t, y, k1);
    ++next;
  }
  for (; next < cps.size(); ++next) {
    const double target = cps[next];
    while (t < target) {
      double step = std::min(h, hmax);
      bool clipped = false;
      if (t + step >= target || target - (t + step) < 1e-12 * step) {
        step = target - t;
        clipped = true;
      }
      tmp = y + step * a21 * k1;
      eval(t + c2 * step, tmp, k2);
      tmp = y + step * (a31 * k1 + a32 * k2);
      eval(t + c3 * step, tmp, k3);
      tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(t + c4 * step, tmp, k4);
      tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(t + c5 * step, tmp, k5);
      tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(t + step, tmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      eval(t + step, ynew, k7);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(err, y, ynew, cfg.atol, cfg.rtol);
      if (!std::isfinite(en)) throw NumericalError("non-finite error estimate during integration");
      if (en <= 1.0) {
        t = clipped ? target : t + step;
        y.swap(ynew);
        k1.swap(k7);
        ++diag.steps;
        if (diag.steps > cfg.max_steps) throw NumericalError("step budget exhausted");
        const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        // a step shortened to land on a checkpoint says nothing about the natural step
        if (!clipped || step * factor > h) h = step * factor;
      } else {
        ++diag.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
        if (h < cfg.min_step) throw NumericalError("adaptive step underflow at t = " + std::to_string(t));
      }
    }
    rec.record(target, y);
    eval(t, y, k1);
  }
}

void integrate_rk4(const Liouvillian& gen, const EvolveConfig& cfg, Mat& y, Recorder& rec, Trajectory& tr) {
  auto& diag = tr.diagnostics;
  double dt = cfg.dt > 0.0 ? cfg.dt : step_ceiling(gen, cfg);
  if (!std::isfinite(dt)) throw std::invalid_argument("RK4 needs a step (dt or max_step) for a static generator");
  const int n = gen.dim();
  Mat k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);
  auto eval = [&](double tt, const Mat& yy, Mat& out) {
    gen.apply(tt, yy, out);
    ++diag.rhs_evals;
  };
  double t = 0.0;
  for (double target : rec.checkpoints()) {
    const double span = target - t;
    if (span > 0.0) {
      const long long steps = std::max(1LL, static_cast<long long>(std::ceil(span / dt - 1e-9)));
      const double h = span / static_cast<double>(steps);
      for (long long s = 0; s < steps; ++s) {
        const double ts = t + h * static_cast<double>(s);
        eval(ts, y, k1);
        tmp = y + (0.5 * h) * k1;
        eval(ts + 0.5 * h, tmp, k2);
        tmp = y + (0.5 * h) * k2;
        eval(ts + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        eval(ts + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++diag.steps;
      }
      t = target;
    }
    rec.record(target, y);
  }
}

}  // namespace

Trajectory evolve(const QMatrix& rho0, const Liouvillian& generator, const EvolveConfig& cfg, const Observer& observer) {
  cfg.validate();
  if (!(*rho0.space() == *generator.space())) throw SpaceError("initial state and generator live on different spaces");
  QMatrix start = rho0.to_density();
  if (start.kind() != Kind::Density) start = QMatrix::density(start.space(), start.data());
  start.check_invariants();
  if (observer.target && observer.target->dim() != (generator.space()->has("magnon") ? generator.space()->dim_of("magnon") : -1)) {
    throw SpaceError("fidelity target does not match the magnon factor");
  }

  Trajectory tr;
  Mat y = start.data();
  Recorder rec(generator.space(), cfg, observer, tr);
  if (cfg.integrator == Integrator::RK45) {
    integrate_rk45(generator, cfg, y, rec, tr);
  } else {
    integrate_rk4(generator, cfg, y, rec, tr);
  }
  tr.final_state = QMatrix(generator.space(), y, Kind::Operator);

  auto& d = tr.diagnostics;
  std::ostringstream msg;
  if (d.max_trace_drift > kDriftGate) msg << "trace drift " << d.max_trace_drift << " exceeds gate; ";
  if (d.max_hermiticity_drift > kDriftGate) msg << "hermiticity drift " << d.max_hermiticity_drift << " exceeds gate; ";
  if (d.min_eigenvalue < kPositivityGate) msg << "min eigenvalue " << d.min_eigenvalue << " below positivity gate; ";
  d.message = msg.str();
  d.ok = d.message.empty();
  return tr;
}

const std::vector<double>& parity_series(const Trajectory& trajectory) { return trajectory.parity; }

double max_parity_deviation(const Trajectory& trajectory) {
  const auto& p = trajectory.parity;
  double worst = 0.0;
  for (double v : p) worst = std::max(worst, std::abs(v - p.front()));
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

struct Block {
  std::vector<std::pair<int, int>> pairs;  // (row, col) of each vectorized entry
};

std::vector<Block> blocks_for(const Liouvillian& gen) {
  const int n = gen.dim();
  const auto parity = magnon_parity(*gen.space());
  int mode = 0;  // 0: one block, 2: by row xor col parity, 4: by (row, col) parities
  if (const auto& g = gen.grading(); g && g->hamiltonian == 1) {
    if (g->dissipators == 1) mode = 4;
    if (g->dissipators == -1) mode = 2;
  }
  std::vector<Block> blocks(mode == 0 ? 1 : mode);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int b = 0;
      if (mode == 2) b = parity[i] ^ parity[j];
      if (mode == 4) b = 2 * parity[i] + parity[j];
      blocks[b].pairs.emplace_back(i, j);
    }
  }
  return blocks;
}

struct BlockNull {
  Mat right, left;  // columns over the block's pairs
};

BlockNull block_null(const Liouvillian& gen, const Block& block, double rel_tol, double& tolerance) {
  const int n = gen.dim();
  const Eigen::Index s = static_cast<Eigen::Index>(block.pairs.size());
  Mat a(s, s);
  Mat e = Mat::Zero(n, n), out;
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto [i, j] = block.pairs[k];
    e(i, j) = 1.0;
    gen.apply(0.0, e, out);
    e(i, j) = 0.0;
    for (Eigen::Index r = 0; r < s; ++r) a(r, k) = out(block.pairs[r].first, block.pairs[r].second);
  }
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = rel_tol * std::max(sv(0), 1e-300);
  tolerance = std::max(tolerance, cut);
  Eigen::Index first = s;
  while (first > 0 && sv(first - 1) <= cut) --first;
  BlockNull bn;
  bn.right = svd.matrixV().rightCols(s - first);
  bn.left = svd.matrixU().rightCols(s - first);
  return bn;
}

Mat unvec(const Block& block, const Vec& v, int n) {
  Mat m = Mat::Zero(n, n);
  for (std::size_t k = 0; k < block.pairs.size(); ++k) m(block.pairs[k].first, block.pairs[k].second) = v(k);
  return m;
}

}  // namespace

FixedSpace fixed_space(const Liouvillian& generator, double rel_tol) {
  if (generator.time_dependent()) throw std::invalid_argument("steady states need a time-independent generator");
  const auto blocks = blocks_for(generator);
  FixedSpace fs;
  fs.blocks = static_cast<int>(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const BlockNull bn = block_null(generator, blocks[b], rel_tol, fs.tolerance);
    for (Eigen::Index k = 0; k < bn.right.cols(); ++k) {
      fs.states.push_back(unvec(blocks[b], bn.right.col(k), generator.dim()));
      fs.conserved.push_back(unvec(blocks[b], bn.left.col(k), generator.dim()));
      fs.block.push_back(static_cast<int>(b));
    }
  }
  return fs;
}

QMatrix steady_state(const Liouvillian& generator) {
  const FixedSpace fs = fixed_space(generator);
  if (fs.states.empty()) throw NumericalError("no null vector found within tolerance");
  if (fs.states.size() > 1) {
    throw NumericalError("fixed space is " + std::to_string(fs.states.size()) +
                         "-dimensional; supply an initial state to select the asymptotic state");
  }
  Mat rho = fs.states.front();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw NumericalError("null vector is traceless");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return QMatrix(generator.space(), rho, Kind::Density);
}

QMatrix steady_state(const Liouvillian& generator, const QMatrix& rho0) {
  if (!(*rho0.space() == *generator.space())) throw SpaceError("initial state and generator live on different spaces");
  if (generator.time_dependent()) throw std::invalid_argument("steady states need a time-independent generator");
  const Mat r0 = rho0.to_density().data();
  const int n = generator.dim();
  const auto blocks = blocks_for(generator);
  Mat rho = Mat::Zero(n, n);
  double tol = 0.0;
  std::size_t found = 0;
  // with four blocks the odd-even block is the adjoint of the even-odd one
  const bool mirrored = blocks.size() == 4;
  bool any_support = false;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (mirrored && b == 2) continue;
    const auto& block = blocks[b];
    Vec v0(static_cast<Eigen::Index>(block.pairs.size()));
    for (std::size_t k = 0; k < block.pairs.size(); ++k) v0(k) = r0(block.pairs[k].first, block.pairs[k].second);
    if (v0.norm() == 0.0) continue;
    any_support = true;
    const BlockNull bn = block_null(generator, block, 1e-9, tol);
    if (bn.right.cols() == 0) continue;
    found += static_cast<std::size_t>(bn.right.cols());
    const Mat overlap = bn.left.adjoint() * bn.right;
    const Vec coeff = overlap.fullPivLu().solve(bn.left.adjoint() * v0);
    const Mat part = unvec(block, bn.right * coeff, n);
    rho += part;
    if (mirrored && b == 1) rho += part.adjoint();
  }
  if (!any_support) throw InvariantError("initial state is zero");
  if (found == 0) throw NumericalError("no null vector found within tolerance");
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return QMatrix(generator.space(), rho, Kind::Density);
}

double trace_distance(const Mat& a, const Mat& b) {
  const Mat d = a - b;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace magcat
