#include "branelab/nearby.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

namespace {

std::string fresh_name(const ModelPtr& m, const std::string& base) {
  std::string name = base;
  while (m->index_of(name)) name += "_";
  return name;
}

std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os << std::setprecision(6) << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

Eigen::MatrixXd pad_q(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + 1, a.cols() + 1);
  out.topLeftCorner(a.rows(), a.cols()) = a;
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Right-hand side v = -X_{f_q} of the flow and its spatial Jacobian. Exact
// evaluators for constant omega_N, pointwise solves and central differences
// otherwise.
class FlowRhs {
 public:
  explicit FlowRhs(const GraphDeformation& g) : g_(&g), n_(g.n()) {
    for (std::size_t j = 0; j < n_; ++j) grad_.emplace_back(g.f.partial(j));
    if (!g.omega_N.is_constant()) return;
    const VectorField X = hamiltonian_field(g);
    exact_ = true;
    for (std::size_t i = 0; i < n_; ++i) {
      const ScalarField vi = -X[i];
      v_.emplace_back(vi);
      for (std::size_t j = 0; j < n_; ++j) a_.emplace_back(vi.partial(j));
    }
  }

  std::size_t n() const noexcept { return n_; }

  /// y holds N coordinates followed by q.
  void eval(const double* y, Eigen::VectorXd& v) const {
    v.resize(static_cast<Eigen::Index>(n_));
    if (exact_) {
      for (std::size_t i = 0; i < n_; ++i) v(static_cast<Eigen::Index>(i)) = v_[i](y);
      return;
    }
    const Eigen::MatrixXd W = g_->omega_N.matrix_at(std::span<const double>(y, n_));
    Eigen::VectorXd df(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) df(static_cast<Eigen::Index>(j)) = grad_[j](y);
    v = -W.transpose().partialPivLu().solve(df);
  }

  void jacobian(const double* y, Eigen::MatrixXd& A) const {
    const auto n = static_cast<Eigen::Index>(n_);
    A.resize(n, n);
    if (exact_) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a_[i * n_ + j](y);
      return;
    }
    constexpr double h = 1e-6;
    std::vector<double> yp(y, y + n_ + 1), ym(yp);
    Eigen::VectorXd vp, vm;
    for (std::size_t j = 0; j < n_; ++j) {
      yp[j] = y[j] + h;
      ym[j] = y[j] - h;
      eval(yp.data(), vp);
      eval(ym.data(), vm);
      A.col(static_cast<Eigen::Index>(j)) = (vp - vm) / (2 * h);
      yp[j] = ym[j] = y[j];
    }
  }

 private:
  const GraphDeformation* g_;
  std::size_t n_;
  bool exact_ = false;
  std::vector<FieldEvaluator> grad_, v_, a_;
};

struct Endpoint {
  Eigen::VectorXd x;
  Eigen::MatrixXd J;
};

Endpoint integrate(const FlowRhs& rhs, std::span<const double> x0, double q0, double h, long steps) {
  const auto n = static_cast<Eigen::Index>(rhs.n());
  Endpoint e{Eigen::Map<const Eigen::VectorXd>(x0.data(), n), Eigen::MatrixXd::Identity(n, n)};
  std::vector<double> y(rhs.n() + 1);
  Eigen::VectorXd k1, k2, k3, k4;
  Eigen::MatrixXd A, K1, K2, K3, K4;
  auto stage = [&](const Eigen::VectorXd& x, const Eigen::MatrixXd& J, double q, Eigen::VectorXd& k,
                   Eigen::MatrixXd& K) {
    std::copy(x.data(), x.data() + n, y.begin());
    y.back() = q;
    rhs.eval(y.data(), k);
    rhs.jacobian(y.data(), A);
    K = A * J;
  };
  for (long s = 0; s < steps; ++s) {
    const double q = q0 + static_cast<double>(s) * h;
    stage(e.x, e.J, q, k1, K1);
    stage(e.x + 0.5 * h * k1, e.J + 0.5 * h * K1, q + 0.5 * h, k2, K2);
    stage(e.x + 0.5 * h * k2, e.J + 0.5 * h * K2, q + 0.5 * h, k3, K3);
    stage(e.x + h * k3, e.J + h * K3, q + h, k4, K4);
    e.x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    e.J += h / 6.0 * (K1 + 2 * K2 + 2 * K3 + K4);
    if (!e.x.allFinite() || !e.J.allFinite()) {
      std::ostringstream os;
      os << "non-finite flow state at q = " << q + h;
      throw FlowError(os.str());
    }
  }
  return e;
}

long step_count(double q0, double q1, const FlowOptions& opts) {
  if (opts.steps_per_unit <= 0) throw FlowError("flow step count must be positive");
  const double span = std::abs(q1 - q0) * opts.steps_per_unit;
  if (!std::isfinite(span) || span > static_cast<double>(opts.max_steps))
    throw FlowError("flow step underflow: more than max_steps steps requested");
  if (span == 0.0) return 0;
  return std::max(1L, static_cast<long>(std::ceil(span - 1e-9)));
}

// Flow of a single point without error estimate or residuals.
Endpoint flow_one(const FlowRhs& rhs, std::span<const double> x, double q0, double q1, const FlowOptions& opts) {
  const long steps = step_count(q0, q1, opts);
  const double h = steps ? (q1 - q0) / static_cast<double>(steps) : 0.0;
  return integrate(rhs, x, q0, h, steps);
}

}  // namespace

GraphDeformation::GraphDeformation(DifferentialForm omega, ScalarField fn, std::optional<DifferentialForm> F)
    : N_model(omega.model()), Y_model(), omega_N(std::move(omega)), F_N(std::move(F)), f(std::move(fn)) {
  if (omega_N.degree() != 2) throw DegreeError("omega_N must be a 2-form");
  if (F_N) {
    if (F_N->degree() != 2) throw DegreeError("F_N must be a 2-form");
    require_same_model(F_N->model(), N_model, "GraphDeformation");
  }
  const auto& fm = f.model();
  if (fm->same_chart(*N_model)) {
    Y_model = ManifoldModel::with_circle(N_model, fresh_name(N_model, "q"));
    f = f.extend_to(Y_model);
    return;
  }
  if (!N_model->is_prefix_of(*fm) || fm->dim() != N_model->dim() + 1 || !fm->is_circle(N_model->dim()))
    throw ModelMismatch("f must live on N or on N x S^1 with the circle last");
  if (fm->q_index() == N_model->dim()) {
    Y_model = fm;
  } else {
    Y_model = ManifoldModel::with_circle(N_model, fm->coord(N_model->dim()).name);
    f = f.embed(Y_model, 0);
  }
}

DifferentialForm GraphDeformation::omega_N_on_Y() const { return omega_N.extend_to(Y_model); }

DifferentialForm omega_f(const GraphDeformation& g) {
  const DifferentialForm f_dq = g.f * DifferentialForm::dx(g.Y_model, g.q_index());
  return g.omega_N_on_Y() - ext_d(f_dq);
}

VectorField hamiltonian_field(const GraphDeformation& g) {
  const Eigen::MatrixXd W = g.omega_N.matrix().constant_value();
  const double cond = condition_number(W);
  if (!(cond <= 1e8)) throw DegenerateForm("omega_N is degenerate", cond);
  const Eigen::MatrixXd P = W.transpose().inverse();
  const std::size_t n = g.n();
  std::vector<ScalarField> df;
  for (std::size_t j = 0; j < n; ++j) df.push_back(g.f.partial(j));
  std::vector<ScalarField> comps(n + 1, ScalarField(g.Y_model));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c != 0.0) comps[i] += c * df[j];
    }
  return VectorField(g.Y_model, std::move(comps));
}

VectorField kernel_field(const GraphDeformation& g) {
  return VectorField::basis(g.Y_model, g.q_index()) - hamiltonian_field(g);
}

Eigen::VectorXd kernel_at(const GraphDeformation& g, std::span<const double> p) {
  const Eigen::MatrixXd K = null_space(omega_f(g).matrix_at(p));
  if (K.cols() != 1) throw DegenerateForm("kernel of omega^f is not one-dimensional", INFINITY);
  const double q = K(static_cast<Eigen::Index>(g.q_index()), 0);
  if (std::abs(q) < 1e-12) throw DegenerateForm("kernel of omega^f is tangent to N", INFINITY);
  return K.col(0) / q;
}

double FlowResult::max_error_estimate() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.error_estimate);
  return m;
}

double FlowResult::max_symplectic_residual() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.symplectic_residual);
  return m;
}

void FlowResult::write_csv(std::ostream& out) const {
  const auto& c = model->coords();
  const std::size_t n = c.size();
  for (const auto& x : c) out << x.name << ",";
  for (const auto& x : c) out << "image_" << x.name << ",";
  for (const auto& a : c)
    for (const auto& b : c) out << "J_" << a.name << "_" << b.name << ",";
  out << "symplectic_residual,error_estimate\n";
  out << std::setprecision(17);
  for (const auto& s : samples) {
    for (double v : s.point) out << v << ",";
    for (double v : s.image) out << v << ",";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out << s.jacobian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ",";
    out << s.symplectic_residual << "," << s.error_estimate << "\n";
  }
}

FlowResult flow(const GraphDeformation& g, double q0, double q1, const std::vector<std::vector<double>>& points,
                const FlowOptions& opts) {
  FlowResult r;
  r.model = g.N_model;
  r.q0 = q0;
  r.q1 = q1;
  r.steps = step_count(q0, q1, opts);
  r.h = r.steps ? (q1 - q0) / static_cast<double>(r.steps) : 0.0;
  if (opts.estimate_error && r.steps * 2 > opts.max_steps) throw FlowError("flow step underflow in error estimate");
  const FlowRhs rhs(g);
  const std::size_t n = g.n();
  r.samples.resize(points.size());
  for_each_index(points.size(), opts.parallel, [&](std::size_t i) {
    const auto& x = points[i];
    if (x.size() != n) throw ModelError("flow point has the wrong dimension");
    FlowSample& s = r.samples[i];
    const Endpoint e = integrate(rhs, x, q0, r.h, r.steps);
    s.point = x;
    s.displacement.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.displacement[k] = e.x(static_cast<Eigen::Index>(k)) - x[k];
    s.image = g.N_model->wrap(std::span<const double>(e.x.data(), n));
    s.jacobian = e.J;
    const Eigen::MatrixXd W0 = g.omega_N.matrix_at(x), W1 = g.omega_N.matrix_at(s.image);
    s.symplectic_residual = max_abs(e.J.transpose() * W1 * e.J - W0);
    if (opts.estimate_error && r.steps > 0) {
      const Endpoint half = integrate(rhs, x, q0, r.h / 2, r.steps * 2);
      s.error_estimate = (half.x - e.x).cwiseAbs().maxCoeff();
    }
  });
  return r;
}

Verdict invariance_check(const DifferentialForm& F_N, const FlowResult& result, double tol) {
  require_same_model(F_N.model(), result.model, "invariance_check");
  Verdict v("invariance");
  SampleTracker t("preserved", tol);
  for (const auto& s : result.samples) {
    const Eigen::MatrixXd d = s.jacobian.transpose() * F_N.matrix_at(s.image) * s.jacobian - F_N.matrix_at(s.point);
    t.observe(s.point, max_abs(d));
  }
  v.add(t.finish());
  return v;
}

struct TransportedForm::State {
  GraphDeformation g;
  DifferentialForm F_N;
  TransportOptions opts;
  std::optional<DifferentialForm> exact;
  std::optional<FlowRhs> rhs;
  std::mutex mu;
  std::vector<std::map<std::vector<double>, Eigen::MatrixXd>> nodes;

  State(GraphDeformation gd, DifferentialForm F, TransportOptions o)
      : g(std::move(gd)), F_N(std::move(F)), opts(std::move(o)) {}

  // Slice at grid node k for the N point y (already wrapped).
  Eigen::MatrixXd node(std::size_t k, const std::vector<double>& y) {
    if (k == 0) return F_N.matrix_at(y);
    {
      std::lock_guard lock(mu);
      auto it = nodes[k].find(y);
      if (it != nodes[k].end()) return it->second;
    }
    const double qk = static_cast<double>(k) / static_cast<double>(opts.q_grid);
    const Endpoint e = flow_one(*rhs, y, qk, 0.0, opts.flow);
    const auto z = g.N_model->wrap(std::span<const double>(e.x.data(), g.n()));
    Eigen::MatrixXd A = e.J.transpose() * F_N.matrix_at(z) * e.J;
    std::lock_guard lock(mu);
    return nodes[k].emplace(y, std::move(A)).first->second;
  }
};

const ModelPtr& TransportedForm::model() const noexcept { return state_->g.Y_model; }
Mode TransportedForm::mode() const noexcept { return state_->exact ? Mode::Exact : Mode::Sampled; }
std::size_t TransportedForm::q_grid() const noexcept { return state_->opts.q_grid; }
const std::optional<DifferentialForm>& TransportedForm::exact() const noexcept { return state_->exact; }

Eigen::MatrixXd TransportedForm::slice_at(std::span<const double> p) const {
  auto& s = *state_;
  const std::size_t n = s.g.n();
  if (p.size() != n + 1) throw ModelError("point has the wrong dimension for Y");
  if (s.exact) return s.exact->matrix_at(p).topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::vector<double> y = s.g.N_model->wrap(p.first(n));
  const double q = p[n] - std::floor(p[n]);
  const auto G = static_cast<double>(s.opts.q_grid);
  double t = q * G;
  auto k = static_cast<std::size_t>(std::floor(t));
  if (k >= s.opts.q_grid) k = s.opts.q_grid - 1;
  const double w = t - static_cast<double>(k);
  Eigen::MatrixXd A = s.node(k, y);
  if (w != 0.0) A = (1.0 - w) * A + w * s.node(k + 1, y);
  return A;
}

Eigen::MatrixXd TransportedForm::matrix_at(std::span<const double> p) const {
  auto& s = *state_;
  if (s.exact) return s.exact->matrix_at(p);
  const auto n = static_cast<Eigen::Index>(s.g.n());
  const Eigen::MatrixXd A = slice_at(p);
  Eigen::VectorXd v;
  s.rhs->eval(p.data(), v);  // v = -X
  const Eigen::VectorXd row = -A.transpose() * v;  // F(d/dq, .) = F(X, .)
  Eigen::MatrixXd M = pad_q(A);
  M.block(n, 0, 1, n) = row.transpose();
  M.block(0, n, n, 1) = -row;
  return M;
}

Verdict TransportedForm::verify(const SamplePlan& plan, double fd_step) const {
  auto& s = *state_;
  const auto& g = s.g;
  const std::size_t n = g.n(), m = n + 1;
  Verdict v("transported_form");
  if (s.exact) {
    const DifferentialForm& F = *s.exact;
    double kres = 0.0;
    try {
      kres = interior(kernel_field(g), F).max_abs_coefficient();
    } catch (const NonConstantForm&) {
      kres = INFINITY;
    }
    v.add(exact_condition("kernel_contains", kres));
    v.add(exact_condition("slice_q0", (F.without_direction(g.q_index()) - s.F_N.extend_to(g.Y_model)).max_abs_coefficient()));
    v.add(exact_condition("closed_fd", ext_d(F).max_abs_coefficient(), "closed exactly"));
    return v;
  }
  const auto pts = plan.points(*g.Y_model);
  const auto G = static_cast<double>(s.opts.q_grid);
  std::vector<double> kr(pts.size()), sr(pts.size()), cr(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    std::vector<double> p = pts[i];
    kr[i] = max_abs(matrix_at(p).transpose() * kernel_at(g, p));
    std::vector<double> p0 = p;
    p0[n] = 0.0;
    sr[i] = max_abs(slice_at(p0) - s.F_N.matrix_at(std::span<const double>(p0).first(n)));
    // closedness at the middle of a q cell
    p[n] = (std::floor(p[n] * G) + 0.5) / G;
    std::vector<Eigen::MatrixXd> D(m);
    for (std::size_t a = 0; a < m; ++a) {
      const double h = a == n ? 0.5 / G : fd_step;
      std::vector<double> pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      D[a] = (matrix_at(pp) - matrix_at(pm)) / (2 * h);
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (std::size_t c = b + 1; c < m; ++c) {
          const auto A = static_cast<Eigen::Index>(a), B = static_cast<Eigen::Index>(b),
                     C = static_cast<Eigen::Index>(c);
          worst = std::max(worst, std::abs(D[a](B, C) - D[b](A, C) + D[c](A, B)));
        }
    cr[i] = worst;
  });
  SampleTracker kt("kernel_contains", plan.tol.sample), st("slice_q0", 0.0), ct("closed_fd", plan.tol.fd);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    kt.observe(pts[i], kr[i]);
    st.observe(pts[i], sr[i]);
    ct.observe(pts[i], cr[i]);
  }
  v.add(kt.finish());
  v.add(st.finish());
  v.add(ct.finish());
  return v;
}

TransportedForm transport_brane(const GraphDeformation& g, const DifferentialForm& F_N, const TransportOptions& opts) {
  if (F_N.degree() != 2) throw DegreeError("transport_brane needs a 2-form");
  require_same_model(F_N.model(), g.N_model, "transport_brane");
  if (opts.q_grid == 0) throw ModelError("q grid must have at least one cell");
  auto s = std::make_shared<TransportedForm::State>(g, F_N, opts);
  if (!opts.force_grid && g.omega_N.is_constant() && is_closed(F_N)) {
    const VectorField X = hamiltonian_field(g);
    const DifferentialForm FY = F_N.extend_to(g.Y_model);
    if (lie_derivative(X, FY).without_direction(g.q_index()).is_zero()) {
      s->exact = FY + wedge(DifferentialForm::dx(g.Y_model, g.q_index()), interior(X, FY));
      return TransportedForm(s);
    }
  }
  s->rhs.emplace(s->g);
  FlowOptions fo = opts.flow;
  fo.estimate_error = false;
  const FlowResult one = flow(g, 0.0, 1.0, opts.plan.points(*g.N_model), fo);
  const Verdict inv = invariance_check(F_N, one, opts.tol);
  if (!inv.pass) {
    const Condition& c = inv.conditions.front();
    std::ostringstream os;
    os << "time-one flow does not preserve F_N (residual " << c.residual;
    if (!c.witnesses.empty()) os << " at " << format_point(c.witnesses.front().point);
    os << ")";
    throw BraneObstruction(os.str());
  }
  s->nodes.resize(opts.q_grid + 1);
  return TransportedForm(s);
}

DifferentialForm istar_df(const GraphDeformation& g, const DifferentialForm& F_N) {
  require_same_model(F_N.model(), g.N_model, "istar_df");
  const EndoField I = endo_from_pair(g.omega_N, F_N);
  const std::size_t n = g.n();
  FieldMatrix IY(g.Y_model, n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) IY(i, j) = I(i, j).extend_to(g.Y_model);
  const DifferentialForm dNf = ext_d(DifferentialForm(g.f)).without_direction(g.q_index());
  return endo_dual(IY, dNf);
}

Verdict closed1f_check(const GraphDeformation& g, const DifferentialForm& F_N) {
  const DifferentialForm a = istar_df(g, F_N);
  const DifferentialForm d = ext_d(a).without_direction(g.q_index());
  Verdict v("closed1f");
  v.add(exact_condition("dN_Istar_df_zero", d.max_abs_coefficient(), d.is_zero() ? "" : d.to_string()));
  return v;
}

std::array<ScalarField, 4> four_equations(const ScalarField& f) {
  const auto& m = f.model();
  const std::size_t x1 = m->require_index("x1"), x2 = m->require_index("x2"), y1 = m->require_index("y1"),
                    y2 = m->require_index("y2");
  auto dd = [&](std::size_t a, std::size_t b) { return f.partial(a).partial(b); };
  return {dd(x1, x1) + dd(y1, y1), dd(x2, x2) + dd(y2, y2), dd(x1, x2) + dd(y1, y2), dd(x1, y2) - dd(y1, x2)};
}

Verdict melanie_check(const DifferentialForm& F, const Distribution& E, const Distribution& G,
                      const SamplePlan& plan) {
  if (F.degree() != 2) throw DegreeError("holonomy criterion needs a 2-form");
  require_same_model(E.model(), F.model(), "melanie_check");
  require_same_model(G.model(), F.model(), "melanie_check");
  if (E.rank() + G.rank() != F.model()->dim()) throw FrameMismatch("rank E + rank G must equal dim Y");
  for (const auto& e : E.frame())
    if (!interior(e, F).is_zero()) throw FrameMismatch("kernel mismatch: E frame field not in the kernel of F");
  const FieldMatrix FG = restrict_to_frame(F, G);
  auto degenerate = [&](const Eigen::MatrixXd& m) { return !(condition_number(m) <= plan.tol.max_condition); };
  if (FG.is_constant()) {
    if (degenerate(FG.constant_value())) throw FrameMismatch("kernel mismatch: F degenerate on G");
  } else {
    for (const auto& p : plan.points(*F.model()))
      if (degenerate(FG.eval(p))) throw FrameMismatch("kernel mismatch: F degenerate on G at " + format_point(p));
  }

  Verdict v("holonomy_criterion");
  double inv = 0.0;
  for (std::size_t a = 0; a < E.rank(); ++a)
    for (std::size_t b = a + 1; b < E.rank(); ++b)
      inv = std::max(inv, interior(lie_bracket(E[a], E[b]), F).max_abs_coefficient());
  v.add(exact_condition("i_involutive", inv));
  double hol = 0.0;
  for (const auto& e : E.frame()) hol = std::max(hol, restrict_to_frame(lie_derivative(e, F), G).max_abs_coefficient());
  v.add(exact_condition("ii_holonomy_invariant", hol));
  const DifferentialForm dF = ext_d(F);
  double leaf = 0.0;
  for (std::size_t a = 0; a < G.rank(); ++a)
    for (std::size_t b = a + 1; b < G.rank(); ++b)
      for (std::size_t c = b + 1; c < G.rank(); ++c)
        leaf = std::max(leaf, apply_form(dF, {G[a], G[b], G[c]}).max_abs_coefficient());
  v.add(exact_condition("iii_leafwise_closed", leaf));
  v.add(exact_condition("dF_zero", dF.max_abs_coefficient()));
  return v;
}

TorusMapPoint mapping_torus_map(const GraphDeformation& g, std::span<const double> p, const FlowOptions& opts,
                                double dq) {
  const std::size_t n = g.n();
  if (p.size() != n + 1) throw ModelError("point has the wrong dimension for Y");
  const FlowRhs rhs(g);
  const auto x = p.first(n);
  const double q = p[n];
  const Endpoint e = flow_one(rhs, x, 0.0, q, opts);
  const Endpoint ep = flow_one(rhs, x, 0.0, q + dq, opts);
  const Endpoint em = flow_one(rhs, x, 0.0, q - dq, opts);
  TorusMapPoint out;
  out.image = g.N_model->wrap(std::span<const double>(e.x.data(), n));
  out.image.push_back(q);
  const auto N = static_cast<Eigen::Index>(n);
  out.jacobian = Eigen::MatrixXd::Zero(N + 1, N + 1);
  out.jacobian.topLeftCorner(N, N) = e.J;
  out.jacobian.block(0, N, N, 1) = (ep.x - em.x) / (2 * dq);
  out.jacobian(N, N) = 1.0;
  return out;
}

Verdict mapping_torus_check(const GraphDeformation& g, const DifferentialForm& F_N, const SamplePlan& plan,
                            const TransportOptions& opts) {
  const TransportedForm T = transport_brane(g, F_N, opts);
  const DifferentialForm wf = omega_f(g);
  Verdict v("mapping_torus");
  if (g.f.is_zero() && T.exact()) {
    const VectorField K = kernel_field(g);
    v.add(exact_condition("pushes_dq_to_kernel",
                          (K - VectorField::basis(g.Y_model, g.q_index())).is_zero() ? 0.0 : INFINITY));
    v.add(exact_condition("omega_pullback", (wf - g.omega_N_on_Y()).max_abs_coefficient()));
    v.add(exact_condition("F_pullback", (*T.exact() - F_N.extend_to(g.Y_model)).max_abs_coefficient()));
    return v;
  }
  const std::size_t n = g.n();
  const auto G = static_cast<double>(T.q_grid());
  const auto pts = plan.points(*g.Y_model);
  std::vector<double> r1(pts.size()), r2(pts.size()), r3(pts.size());
  std::vector<std::vector<double>> snapped(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    std::vector<double> p = pts[i];
    p[n] = std::fmod(std::round(p[n] * G), G) / G;
    snapped[i] = p;
    const TorusMapPoint psi = mapping_torus_map(g, p, opts.flow);
    const Eigen::VectorXd K = kernel_at(g, psi.image);
    r1[i] = (psi.jacobian.col(static_cast<Eigen::Index>(n)) - K).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd& D = psi.jacobian;
    const auto x = std::span<const double>(p).first(n);
    r2[i] = max_abs(D.transpose() * wf.matrix_at(psi.image) * D - pad_q(g.omega_N.matrix_at(x)));
    r3[i] = max_abs(D.transpose() * T.matrix_at(psi.image) * D - pad_q(F_N.matrix_at(x)));
  });
  SampleTracker t1("pushes_dq_to_kernel", plan.tol.sample), t2("omega_pullback", plan.tol.sample),
      t3("F_pullback", plan.tol.sample);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t1.observe(snapped[i], r1[i]);
    t2.observe(snapped[i], r2[i]);
    t3.observe(snapped[i], r3[i]);
  }
  v.add(t1.finish());
  v.add(t2.finish());
  v.add(t3.finish());
  return v;
}

}  // namespace branelab
