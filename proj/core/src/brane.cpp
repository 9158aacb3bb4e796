#include "branelab/brane.hpp"

#include <algorithm>
#include <cmath>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

namespace {

std::vector<std::vector<double>> sample_points(const ManifoldModel& m, const SamplePlan& plan) {
  return plan.points(m);
}

Distribution joint(const Distribution& E, const Distribution& G) {
  auto f = E.frame();
  f.insert(f.end(), G.frame().begin(), G.frame().end());
  return Distribution(E.model(), f);
}

std::vector<double> with_zero_fibers(std::span<const double> p, std::size_t m) {
  std::vector<double> out(p.begin(), p.end());
  out.resize(m, 0.0);
  return out;
}

std::string fresh_name(const ModelPtr& m, const std::string& base) {
  std::string name = base;
  while (m->index_of(name)) name += "_";
  return name;
}

// Kernel and transverse conditions decided symbolically for constant
// restricted matrices.
bool exact_pointwise(const BraneCandidate& c, const SamplePlan& plan, Verdict& out) {
  const FieldMatrix wg = restrict_to_frame(c.omega, c.G);
  const FieldMatrix fg = restrict_to_frame(c.F, c.G);
  if (!wg.is_constant() || !fg.is_constant()) return false;

  double kernel_res = 0.0;
  for (const auto& e : c.E.frame()) {
    kernel_res = std::max(kernel_res, interior(e, c.omega).max_abs_coefficient());
    kernel_res = std::max(kernel_res, interior(e, c.F).max_abs_coefficient());
  }
  const Eigen::MatrixXd wgn = wg.constant_value();
  const Eigen::MatrixXd fgn = fg.constant_value();
  const double cw = condition_number(wgn), cf = condition_number(fgn);
  Condition k = exact_condition("kernels_equal", kernel_res);
  if (!(cw <= plan.tol.max_condition) || !(cf <= plan.tol.max_condition)) {
    k.pass = false;
    k.residual = std::max(k.residual, 1.0);
    k.detail = "restriction to G is degenerate (condition omega " + std::to_string(cw) + ", F " +
               std::to_string(cf) + ")";
  } else if (!k.pass) {
    k.detail = "E is not annihilated by omega and F";
  }
  out.add(k);

  if (!(cw <= plan.tol.max_condition)) {
    Condition t;
    t.name = "transverse_I_squares";
    t.pass = false;
    t.residual = INFINITY;
    t.detail = "omega|_G is degenerate";
    out.add(t);
    return true;
  }
  const FieldMatrix Ig = wg.inverse_constant(plan.tol.max_condition) * fg;
  const FieldMatrix defect = Ig * Ig + FieldMatrix::identity(c.model, Ig.rows());
  out.add(exact_condition("transverse_I_squares", defect.max_abs_coefficient()));
  return true;
}

}  // namespace

BraneCandidate::BraneCandidate(std::string n, DifferentialForm om, DifferentialForm f, Distribution e,
                               Distribution g, std::optional<std::vector<DifferentialForm>> cf)
    : name(std::move(n)),
      model(om.model()),
      omega(std::move(om)),
      F(std::move(f)),
      E(std::move(e)),
      G(std::move(g)),
      coframe(std::move(cf)) {
  require_same_model(model, F.model(), "candidate F");
  require_same_model(model, E.model(), "candidate E");
  require_same_model(model, G.model(), "candidate G");
  if (omega.degree() != 2 && !omega.is_zero()) throw DegreeError("candidate omega must be a 2-form");
  if (F.degree() != 2 && !F.is_zero()) throw DegreeError("candidate F must be a 2-form");
  if (omega.degree() != 2) omega = DifferentialForm(model, 2);
  if (F.degree() != 2) F = DifferentialForm(model, 2);
  if (coframe && coframe->size() != E.rank()) throw FrameMismatch("coframe size differs from rank E");
}

void BraneCandidate::validate(const SamplePlan& plan) const {
  if (E.rank() + G.rank() != model->dim())
    throw FrameMismatch("rank E + rank G = " + std::to_string(E.rank() + G.rank()) + ", dim Y = " +
                        std::to_string(model->dim()));
  if (G.rank() % 4 != 0)
    throw FrameMismatch("transverse rank " + std::to_string(G.rank()) + " is not a multiple of 4");
  const Condition c = joint(E, G).independence(plan);
  if (!c.pass) throw FrameMismatch("E and G frames are not jointly independent");
}

std::vector<DifferentialForm> BraneCandidate::e_coframe() const {
  if (coframe) {
    for (std::size_t a = 0; a < coframe->size(); ++a) {
      const auto& th = (*coframe)[a];
      if (th.degree() != 1) throw FrameMismatch("coframe entries must be 1-forms");
      require_same_model(model, th.model(), "coframe");
      for (std::size_t b = 0; b < E.rank(); ++b) {
        const ScalarField v = apply_form(th, {E[b]});
        if (!(v == ScalarField::constant(model, a == b ? 1.0 : 0.0)))
          throw FrameMismatch("coframe is not dual to the E frame");
      }
      for (const auto& g : G.frame())
        if (!apply_form(th, {g}).is_zero()) throw FrameMismatch("coframe does not vanish on G");
    }
    return *coframe;
  }
  const Distribution all = joint(E, G);
  const FieldMatrix m = all.matrix();
  if (!m.is_constant())
    throw FrameMismatch("non-constant E/G frames need an explicit coframe for the ambient model");
  const Eigen::MatrixXd inv = m.constant_value().inverse();
  std::vector<DifferentialForm> out;
  for (std::size_t a = 0; a < E.rank(); ++a) {
    std::vector<ScalarField> comps;
    for (std::size_t j = 0; j < model->dim(); ++j)
      comps.push_back(ScalarField::constant(model, inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j))));
    out.push_back(DifferentialForm::from_components(comps));
  }
  return out;
}

AmbientModel AmbientModel::gotay(const BraneCandidate& c) {
  const auto theta = c.e_coframe();
  ModelPtr M = c.model;
  std::vector<std::size_t> fibers;
  for (std::size_t a = 0; a < theta.size(); ++a) {
    M = ManifoldModel::with_fiber(M, fresh_name(M, theta.size() == 1 ? "t" : "t" + std::to_string(a + 1)));
    fibers.push_back(M->dim() - 1);
  }
  DifferentialForm om = c.omega.extend_to(M);
  for (std::size_t a = 0; a < theta.size(); ++a) {
    const ScalarField t = ScalarField::coordinate(M, fibers[a]);
    om += ext_d(t * theta[a].extend_to(M));
  }
  return AmbientModel{M, om, fibers};
}

Verdict AmbientModel::validate(const SamplePlan& plan) const {
  Verdict v("ambient");
  v.add(exact_condition("omega_M_closed", is_closed(omega_M) ? 0.0 : ext_d(omega_M).max_abs_coefficient()));
  if (omega_M.is_constant()) {
    const double cond = condition_number(omega_M.matrix().constant_value());
    Condition c;
    c.name = "nondegenerate";
    c.pass = cond <= plan.tol.max_condition;
    c.residual = c.pass ? 0.0 : cond;
    c.detail = "condition " + std::to_string(cond);
    v.add(c);
    return v;
  }
  SampleTracker t("nondegenerate", plan.tol.max_condition);
  SamplePlan p = plan;
  for (auto i : fiber_indices) p.pinned[i] = 0.0;
  for (const auto& pt : p.points(*model)) t.observe(pt, condition_number(omega_M.matrix_at(pt)));
  v.add(t.finish());
  return v;
}

Verdict check_space_filling(const DifferentialForm& omega, const DifferentialForm& F, const SamplePlan& plan) {
  require_same_model(omega.model(), F.model(), "check_space_filling");
  if (omega.degree() != 2 || F.degree() != 2) throw DegreeError("check_space_filling needs 2-forms");
  Verdict v("space_filling");
  v.add(exact_condition("closed_omega", is_closed(omega) ? 0.0 : ext_d(omega).max_abs_coefficient()));
  v.add(exact_condition("closed_F", is_closed(F) ? 0.0 : ext_d(F).max_abs_coefficient()));
  const auto& model = omega.model();
  if (omega.is_constant()) {
    const double cond = condition_number(omega.matrix().constant_value());
    Condition c;
    c.name = "nondegenerate";
    c.pass = cond <= plan.tol.max_condition;
    c.residual = c.pass ? 0.0 : cond;
    c.detail = "condition " + std::to_string(cond);
    v.add(c);
    if (!c.pass) {
      Condition s;
      s.name = "I_squares_minus_id";
      s.pass = false;
      s.residual = INFINITY;
      s.detail = "omega is degenerate";
      v.add(s);
      return v;
    }
    const EndoField I = endo_from_pair(omega, F, plan.tol.max_condition);
    const FieldMatrix defect = I * I + FieldMatrix::identity(model, model->dim());
    v.add(exact_condition("I_squares_minus_id", defect.max_abs_coefficient()));
    return v;
  }
  SampleTracker nd("nondegenerate", plan.tol.max_condition);
  SampleTracker sq("I_squares_minus_id", plan.tol.sample);
  const auto pts = sample_points(*model, plan);
  std::vector<double> conds(pts.size()), res(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    const Eigen::MatrixXd W = omega.matrix_at(pts[i]);
    conds[i] = condition_number(W);
    if (!(conds[i] <= plan.tol.max_condition)) {
      res[i] = INFINITY;
      return;
    }
    const Eigen::MatrixXd I = W.partialPivLu().solve(F.matrix_at(pts[i]));
    res[i] = (I * I + Eigen::MatrixXd::Identity(I.rows(), I.cols())).cwiseAbs().maxCoeff();
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    nd.observe(pts[i], conds[i]);
    if (std::isinf(res[i]))
      sq.fail(pts[i], "omega degenerate");
    else
      sq.observe(pts[i], res[i]);
  }
  v.add(nd.finish());
  v.add(sq.finish());
  return v;
}

void check_brane_pointwise(const ModelPtr& model, const MatrixAt& omega, const MatrixAt& F,
                           const Distribution& E, const Distribution& G, const SamplePlan& plan,
                           Verdict& out) {
  const auto pts = sample_points(*model, plan);
  struct Row {
    double kernel = 0.0, transverse = 0.0;
    std::string kernel_note, transverse_note;
  };
  std::vector<Row> rows(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    const auto& p = pts[i];
    const Eigen::MatrixXd W = omega(p), Fm = F(p);
    const Eigen::MatrixXd QE = column_space(E.at(p), plan.tol.rank_rel);
    const Eigen::MatrixXd NW = null_space(W, plan.tol.rank_rel);
    const Eigen::MatrixXd NF = null_space(Fm, plan.tol.rank_rel);
    Row& r = rows[i];
    r.kernel = std::max(subspace_distance(NW, QE), subspace_distance(NF, QE));
    if (NW.cols() != QE.cols() || NF.cols() != QE.cols())
      r.kernel_note = "kernel dimensions omega " + std::to_string(NW.cols()) + ", F " +
                      std::to_string(NF.cols()) + ", E " + std::to_string(QE.cols());
    const Eigen::MatrixXd g = G.at(p);
    const Eigen::MatrixXd wg = g.transpose() * W * g;
    const double cond = condition_number(wg);
    if (!(cond <= plan.tol.max_condition)) {
      r.transverse = INFINITY;
      r.transverse_note = "omega|_G degenerate";
      return;
    }
    const Eigen::MatrixXd Ig = wg.partialPivLu().solve(g.transpose() * Fm * g);
    r.transverse = (Ig * Ig + Eigen::MatrixXd::Identity(Ig.rows(), Ig.cols())).cwiseAbs().maxCoeff();
  });
  SampleTracker k("kernels_equal", plan.tol.sample);
  SampleTracker t("transverse_I_squares", plan.tol.sample);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    k.observe(pts[i], rows[i].kernel, rows[i].kernel_note);
    if (std::isinf(rows[i].transverse))
      t.fail(pts[i], rows[i].transverse_note);
    else
      t.observe(pts[i], rows[i].transverse);
  }
  out.add(k.finish());
  out.add(t.finish());
}

Verdict check_brane(const BraneCandidate& c, const SamplePlan& plan) {
  c.validate(plan);
  Verdict v("brane");
  if (!exact_pointwise(c, plan, v)) {
    check_brane_pointwise(
        c.model, [&](std::span<const double> p) { return c.omega.matrix_at(p); },
        [&](std::span<const double> p) { return c.F.matrix_at(p); }, c.E, c.G, plan, v);
  }
  v.add(exact_condition("F_closed", is_closed(c.F) ? 0.0 : ext_d(c.F).max_abs_coefficient()));
  v.add(exact_condition("omega_closed", is_closed(c.omega) ? 0.0 : ext_d(c.omega).max_abs_coefficient()));
  return v;
}

Eigen::MatrixXd tau_F_subspace(const BraneCandidate& c, const AmbientModel& ambient,
                               std::span<const double> point_on_Y) {
  const auto n = static_cast<Eigen::Index>(c.model->dim());
  const auto m = static_cast<Eigen::Index>(ambient.model->dim());
  const Eigen::MatrixXd Fm = c.F.matrix_at(point_on_Y);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(2 * m, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    tau(i, i) = 1.0;
    // interior(d_i, F)_j = F(d_i, d_j)
    for (Eigen::Index j = 0; j < n; ++j) tau(m + j, i) = Fm(i, j);
  }
  for (std::size_t b = 0; b < ambient.fiber_indices.size(); ++b)
    tau(m + static_cast<Eigen::Index>(ambient.fiber_indices[b]), n + static_cast<Eigen::Index>(b)) = 1.0;
  return tau;
}

Eigen::MatrixXd split_pairing_gram(const Eigen::MatrixXd& tau) {
  const Eigen::Index m = tau.rows() / 2;
  const Eigen::MatrixXd X = tau.topRows(m), Xi = tau.bottomRows(m);
  return 0.5 * (Xi.transpose() * X + X.transpose() * Xi);
}

Eigen::MatrixXd generalized_J(const Eigen::MatrixXd& W) {
  const Eigen::Index m = W.rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  // interior(X, Omega) = W^T X; its inverse solves W^T Y = xi.
  J.topRightCorner(m, m) = -W.transpose().inverse();
  J.bottomLeftCorner(m, m) = W.transpose();
  return J;
}

Verdict check_brane_via_J(const BraneCandidate& c, const AmbientModel& ambient, const SamplePlan& plan) {
  c.validate(plan);
  Verdict v("brane_via_J");
  v.add(exact_condition("F_closed", is_closed(c.F) ? 0.0 : ext_d(c.F).max_abs_coefficient()));
  v.add(exact_condition("omega_M_closed",
                        is_closed(ambient.omega_M) ? 0.0 : ext_d(ambient.omega_M).max_abs_coefficient()));
  const auto pts = sample_points(*c.model, plan);
  const auto n = static_cast<Eigen::Index>(c.model->dim());
  const auto m = static_cast<Eigen::Index>(ambient.model->dim());
  struct Row {
    double cond = 0.0, charac = 0.0, gram = 0.0, contain = 0.0;
  };
  std::vector<Row> rows(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    Row& r = rows[i];
    const auto pm = with_zero_fibers(pts[i], static_cast<std::size_t>(m));
    const Eigen::MatrixXd W = ambient.omega_M.matrix_at(pm);
    r.cond = condition_number(W);
    const Eigen::MatrixXd tau = tau_F_subspace(c, ambient, pts[i]);
    r.gram = split_pairing_gram(tau).cwiseAbs().maxCoeff();
    if (!(r.cond <= plan.tol.max_condition)) {
      r.charac = r.contain = INFINITY;
      return;
    }
    // Omega-orthogonal of TY: v with Omega(v, w) = 0 for all w in TY.
    const Eigen::MatrixXd orth = null_space(W.leftCols(n).transpose(), plan.tol.rank_rel);
    Eigen::MatrixXd Ep = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(c.E.rank()));
    if (c.E.rank()) Ep.topRows(n) = c.E.at(pts[i]);
    r.charac = subspace_distance(orth, column_space(Ep, plan.tol.rank_rel));
    const Eigen::MatrixXd Q = column_space(tau, plan.tol.rank_rel);
    r.contain = outside_residual(Q, generalized_J(W) * Q);
  });
  SampleTracker nd("nondegenerate", plan.tol.max_condition);
  SampleTracker ch("characteristic_is_E", plan.tol.sample);
  SampleTracker gr("tau_lagrangian", plan.tol.gram);
  SampleTracker jc("J_invariant", plan.tol.sample);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    nd.observe(pts[i], rows[i].cond);
    ch.observe(pts[i], rows[i].charac);
    gr.observe(pts[i], rows[i].gram);
    jc.observe(pts[i], rows[i].contain);
  }
  v.add(nd.finish());
  v.add(ch.finish());
  v.add(gr.finish());
  v.add(jc.finish());
  return v;
}

BraneCandidate local_normal_form(int n, int k, const std::string& suffix) {
  if (n < 1 || k < 0) throw ModelError("local_normal_form needs n >= 1 and k >= 0");
  std::vector<Coordinate> coords;
  for (int i = 1; i <= 2 * n; ++i) coords.push_back({"x" + std::to_string(i) + suffix, CoordKind::Line});
  for (int i = 1; i <= 2 * n; ++i) coords.push_back({"y" + std::to_string(i) + suffix, CoordKind::Line});
  for (int i = 1; i <= k; ++i) coords.push_back({"t" + std::to_string(i) + suffix, CoordKind::Line});
  auto M = ManifoldModel::make(coords);
  const ScalarField one = ScalarField::constant(M, 1.0);
  DifferentialForm om(M, 2), F(M, 2);
  const int x0 = 0, y0 = 2 * n;
  for (int j = 0; j < n; ++j) {
    const int xa = x0 + 2 * j, xb = xa + 1, ya = y0 + 2 * j, yb = ya + 1;
    om += DifferentialForm::monomial(one, {xa, yb}) + DifferentialForm::monomial(one, {ya, xb});
    F += DifferentialForm::monomial(one, {xa, xb}) - DifferentialForm::monomial(one, {ya, yb});
  }
  std::vector<VectorField> e, g;
  for (int i = 0; i < 4 * n; ++i) g.push_back(VectorField::basis(M, static_cast<std::size_t>(i)));
  for (int i = 0; i < k; ++i) e.push_back(VectorField::basis(M, static_cast<std::size_t>(4 * n + i)));
  return BraneCandidate("local_normal_form(" + std::to_string(n) + "," + std::to_string(k) + ")", om, F,
                        Distribution(M, e), Distribution(M, g));
}

BraneCandidate product(const BraneCandidate& a, const BraneCandidate& b) {
  auto M = ManifoldModel::product(a.model, b.model);
  const std::size_t off = a.model->dim();
  std::vector<VectorField> e, g;
  for (const auto& v : a.E.frame()) e.push_back(v.embed(M, 0));
  for (const auto& v : b.E.frame()) e.push_back(v.embed(M, off));
  for (const auto& v : a.G.frame()) g.push_back(v.embed(M, 0));
  for (const auto& v : b.G.frame()) g.push_back(v.embed(M, off));
  std::optional<std::vector<DifferentialForm>> cf;
  if (a.coframe || b.coframe) {
    std::vector<DifferentialForm> th;
    for (const auto& t : a.e_coframe()) th.push_back(t.embed(M, 0));
    for (const auto& t : b.e_coframe()) th.push_back(t.embed(M, off));
    cf = std::move(th);
  }
  return BraneCandidate(a.name + " x " + b.name, a.omega.embed(M, 0) + b.omega.embed(M, off),
                        a.F.embed(M, 0) + b.F.embed(M, off), Distribution(M, e), Distribution(M, g), cf);
}

}  // namespace branelab
