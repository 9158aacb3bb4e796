#include "branelab/infdef.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

namespace {

// B(e_a, g_j) over two frames.
FieldMatrix cross_frame(const DifferentialForm& B, const Distribution& E, const Distribution& G) {
  FieldMatrix m(B.model(), E.rank(), G.rank());
  for (std::size_t a = 0; a < E.rank(); ++a)
    for (std::size_t j = 0; j < G.rank(); ++j) m(a, j) = apply_form(B, {E[a], G[j]});
  return m;
}

// Blocks of r_bar and B over the E/G frames, and the transverse I in the
// G frame (I = WG^-1 FG, so omega(I g, w) = F(g, w)).
template <class M>
struct FrameBlocks {
  M I, D_EE, D_EG, D_GG, B_EE, B_EG, B_GG;
};

template <class M>
struct Residuals {
  M r_closed, B_horizontal, mixed, quad, type11;
};

template <class M>
Residuals<M> residuals(const FrameBlocks<M>& b) {
  const M It = tr(b.I);
  return {b.D_EE, b.B_EE, b.B_EG + b.D_EG * b.I, It * b.B_GG + b.B_GG * b.I - b.D_GG + It * b.D_GG * b.I,
          It * b.B_GG * b.I - b.B_GG};
}

FrameBlocks<FieldMatrix> exact_blocks(const InfDefPair& p, const BraneCandidate& c, const FieldMatrix& Iinv_WG) {
  const DifferentialForm D = ext_d(p.r_bar);
  return {Iinv_WG * restrict_to_frame(c.F, c.G),
          restrict_to_frame(D, c.E),
          cross_frame(D, c.E, c.G),
          restrict_to_frame(D, c.G),
          restrict_to_frame(p.B, c.E),
          cross_frame(p.B, c.E, c.G),
          restrict_to_frame(p.B, c.G)};
}

FrameBlocks<Eigen::MatrixXd> sampled_blocks(const DifferentialForm& D, const InfDefPair& p, const BraneCandidate& c,
                                            std::span<const double> x) {
  const Eigen::MatrixXd E = c.E.at(x), G = c.G.at(x);
  const Eigen::MatrixXd Dm = D.matrix_at(x), Bm = p.B.matrix_at(x);
  const Eigen::MatrixXd WG = G.transpose() * c.omega.matrix_at(x) * G;
  const Eigen::MatrixXd FG = G.transpose() * c.F.matrix_at(x) * G;
  return {WG.partialPivLu().solve(FG),
          E.transpose() * Dm * E,
          E.transpose() * Dm * G,
          G.transpose() * Dm * G,
          E.transpose() * Bm * E,
          E.transpose() * Bm * G,
          G.transpose() * Bm * G};
}

double closed_residual(const DifferentialForm& B) {
  if (B.degree() >= static_cast<int>(B.model()->dim())) return 0.0;
  return ext_d(B).max_abs_coefficient();
}

const char* kQuadFull = "full quadratic identity with lifts in G";
const char* kQuad11 = "G involutive: type (1,1) on G";

DifferentialForm istar_on_chart(const FieldMatrix& I_N, const ModelPtr& Y, const DifferentialForm& xi) {
  const std::size_t n = I_N.rows();
  FieldMatrix IY(Y, Y->dim(), Y->dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) IY(i, j) = I_N(i, j).extend_to(Y);
  return endo_dual(IY, xi);
}

bool form_is_periodic(const DifferentialForm& a) {
  for (const auto& [idx, f] : a.coeffs())
    if (!f.is_periodic()) return false;
  return true;
}

}  // namespace

InfDefPair InfDefPair::make(const BraneCandidate& c, std::vector<ScalarField> rho, DifferentialForm B) {
  if (rho.size() != c.E.rank()) throw FrameMismatch("rho needs one function per E frame field");
  if (B.degree() != 2) throw DegreeError("B must be a 2-form");
  require_same_model(B.model(), c.model, "InfDefPair");
  DifferentialForm r_bar(c.model, 1);
  if (!rho.empty()) {
    const auto theta = c.e_coframe();
    for (std::size_t a = 0; a < rho.size(); ++a) {
      require_same_model(rho[a].model(), c.model, "InfDefPair");
      r_bar += rho[a] * theta[a];
    }
  }
  return InfDefPair{std::move(rho), std::move(B), std::move(r_bar)};
}

InfDefPair InfDefPair::zero(const BraneCandidate& c) {
  return make(c, std::vector<ScalarField>(c.E.rank(), ScalarField(c.model)), DifferentialForm(c.model, 2));
}

bool is_involutive_complement(const BraneCandidate& c) {
  if (c.E.rank() == 0) return true;
  std::vector<DifferentialForm> theta;
  try {
    theta = c.e_coframe();
  } catch (const FrameMismatch&) {
    return false;
  }
  for (std::size_t i = 0; i < c.G.rank(); ++i)
    for (std::size_t j = i + 1; j < c.G.rank(); ++j) {
      const VectorField br = lie_bracket(c.G[i], c.G[j]);
      for (const auto& th : theta)
        if (!apply_form(th, {br}).is_zero()) return false;
    }
  return true;
}

Verdict check_infdef(const InfDefPair& p, const BraneCandidate& c, const SamplePlan& plan) {
  c.validate(plan);
  require_same_model(p.B.model(), c.model, "check_infdef");
  Verdict v("infdef");
  const bool involutive = is_involutive_complement(c);
  const FieldMatrix WG = restrict_to_frame(c.omega, c.G);
  const double B_closed = closed_residual(p.B);
  if (WG.is_constant()) {
    const auto r = residuals(exact_blocks(p, c, WG.inverse_constant(plan.tol.max_condition)));
    v.add(exact_condition("r_foliated_closed", residual_of(r.r_closed)));
    v.add(exact_condition("B_closed", B_closed));
    v.add(exact_condition("B_horizontal", residual_of(r.B_horizontal)));
    v.add(exact_condition("mixed_iii", residual_of(r.mixed)));
    v.add(exact_condition("quad_iv", residual_of(involutive ? r.type11 : r.quad), involutive ? kQuad11 : kQuadFull));
    return v;
  }
  const DifferentialForm D = ext_d(p.r_bar);
  const auto pts = plan.points(*c.model);
  std::vector<Residuals<Eigen::MatrixXd>> res(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) { res[i] = residuals(sampled_blocks(D, p, c, pts[i])); });
  SampleTracker rc("r_foliated_closed", plan.tol.sample), bh("B_horizontal", plan.tol.sample),
      mx("mixed_iii", plan.tol.sample), qd("quad_iv", plan.tol.sample);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rc.observe(pts[i], residual_of(res[i].r_closed));
    bh.observe(pts[i], residual_of(res[i].B_horizontal));
    mx.observe(pts[i], residual_of(res[i].mixed));
    qd.observe(pts[i], residual_of(involutive ? res[i].type11 : res[i].quad));
  }
  v.add(rc.finish());
  v.add(exact_condition("B_closed", B_closed));
  v.add(bh.finish());
  v.add(mx.finish());
  Condition q = qd.finish();
  q.detail = involutive ? kQuad11 : kQuadFull;
  v.add(std::move(q));
  return v;
}

Verdict infdef_general_check(const InfDefPair& p, const BraneCandidate& c, const SamplePlan& plan) {
  c.validate(plan);
  require_same_model(p.B.model(), c.model, "infdef_general_check");
  Verdict v("infdef_general");
  const DifferentialForm omega_dot = -ext_d(p.r_bar);
  const auto pts = plan.points(*c.model);
  struct Row {
    double hor_w = 0, hor_f = 0, kern = 0, quad = 0;
  };
  std::vector<Row> rows(pts.size());
  for_each_index(pts.size(), plan.parallel, [&](std::size_t i) {
    const auto& x = pts[i];
    const Eigen::MatrixXd W = c.omega.matrix_at(x), Fm = c.F.matrix_at(x);
    const Eigen::MatrixXd Od = omega_dot.matrix_at(x), Fd = p.B.matrix_at(x), E = c.E.at(x);
    // Minimum-norm lift of I[X]: solves interior(v, omega) = interior(X, F).
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(plan.tol.rank_rel);
    const Eigen::MatrixXd L = svd.solve(Fm.transpose());
    Row& r = rows[i];
    r.hor_w = E.size() ? (E.transpose() * Od * E).cwiseAbs().maxCoeff() : 0.0;
    r.hor_f = E.size() ? (E.transpose() * Fd * E).cwiseAbs().maxCoeff() : 0.0;
    // Fdot(e) = I^*(omega_dot(e)) as covectors on TY; I^* alpha = L^T alpha.
    if (E.size()) r.kern = (Fd.transpose() * E - L.transpose() * (Od.transpose() * E)).cwiseAbs().maxCoeff();
    // omega_dot(X) + Fdot(IX) = I^*(omega_dot(IX) - Fdot(X)) for all coordinate X.
    const Eigen::MatrixXd lhs = Od.transpose() + Fd.transpose() * L;
    const Eigen::MatrixXd rhs = L.transpose() * (Od.transpose() * L - Fd.transpose());
    r.quad = (lhs - rhs).cwiseAbs().maxCoeff();
  });
  SampleTracker hw("i_omega_dot_horizontal", plan.tol.sample), hf("ii_F_dot_horizontal", plan.tol.sample),
      kn("iii_kernel_condition", plan.tol.sample), qd("iv_quadratic", plan.tol.sample);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    hw.observe(pts[i], rows[i].hor_w);
    hf.observe(pts[i], rows[i].hor_f);
    kn.observe(pts[i], rows[i].kern);
    qd.observe(pts[i], rows[i].quad);
  }
  v.add(hw.finish());
  v.add(exact_condition("ii_F_dot_closed", closed_residual(p.B)));
  v.add(hf.finish());
  v.add(kn.finish());
  v.add(qd.finish());
  return v;
}

InfDefPair build_infdef(const ScalarField& rho, const DifferentialForm& B_N0, const BraneCandidate& c) {
  const ModelPtr& Y = c.model;
  const std::size_t n = Y->dim() - 1;
  if (Y->q_index() != n) throw FrameMismatch("build_infdef needs Y = N x S^1 with q last");
  if (c.E.rank() != 1 || !(c.E[0] == VectorField::basis(Y, n)) || c.G.rank() != n)
    throw FrameMismatch("build_infdef needs E = d/dq and G = TN");
  for (std::size_t i = 0; i < n; ++i)
    if (!(c.G[i] == VectorField::basis(Y, i))) throw FrameMismatch("build_infdef needs E = d/dq and G = TN");
  const ModelPtr& N = B_N0.model();
  if (N->dim() != n || !N->is_prefix_of(*Y)) throw ModelMismatch("B_N0 must live on N");
  if (B_N0.degree() != 2) throw DegreeError("B_N0 must be a 2-form");
  require_same_model(rho.model(), Y, "build_infdef");

  const DifferentialForm omega_N = c.omega.restrict_to(N), F_N = c.F.restrict_to(N);
  const EndoField I = endo_from_pair(omega_N, F_N);
  if (!is_closed(B_N0)) throw Type11Violation("B_N0 is not closed");
  const Verdict t = is_type_11(B_N0, I);
  if (!t.pass) throw Type11Violation("B_N0 is not of type (1,1): " + t.detail);

  const DifferentialForm dN_rho = ext_d(DifferentialForm(rho)).without_direction(n);
  const DifferentialForm gamma = istar_on_chart(I, Y, dN_rho);
  DifferentialForm avg(Y, 1), integral(Y, 1);
  for (const auto& [idx, f] : gamma.coeffs()) {
    avg.add_term(idx, f.circle_average(n));
    integral.add_term(idx, f.circle_antiderivative(n));
  }
  const DifferentialForm d_avg = ext_d(avg);
  if (!d_avg.is_zero())
    throw AverageObstruction("d_N of the q-average of I^* d_N rho is " + d_avg.to_string());

  const DifferentialForm dq = DifferentialForm::dx(Y, n);
  DifferentialForm B = B_N0.extend_to(Y) + ext_d(integral).without_direction(n) + wedge(dq, gamma);
  if (!form_is_periodic(B)) throw std::logic_error("build_infdef: a q-polynomial term survived in B");
  return InfDefPair::make(c, {rho}, std::move(B));
}

InfDefPair hamiltonian_generator(const ScalarField& f, const BraneCandidate& c) {
  require_same_model(f.model(), c.model, "hamiltonian_generator");
  const FieldMatrix P = restrict_to_frame(c.omega, c.G).inverse_constant().transpose();
  const std::size_t m = c.G.rank();
  std::vector<ScalarField> gf;
  for (const auto& g : c.G.frame()) gf.push_back(g.apply(f));
  VectorField X(c.model);
  for (std::size_t i = 0; i < m; ++i) {
    ScalarField xi(c.model);
    for (std::size_t j = 0; j < m; ++j) xi += P(i, j) * gf[j];
    X += xi * c.G[i];
  }
  std::vector<ScalarField> rho;
  for (const auto& e : c.E.frame()) rho.push_back(e.apply(f));
  return InfDefPair::make(c, std::move(rho), lie_derivative(X, c.F));
}

DifferentialForm upsilon(const InfDefPair& pair) { return pair.r_bar; }

Verdict upsilon_image_check(const DifferentialForm& r, const DifferentialForm& omega_N, const DifferentialForm& F_N) {
  if (r.degree() != 1) throw DegreeError("r must be a 1-form");
  const ModelPtr& Y = r.model();
  const ModelPtr& N = omega_N.model();
  const std::size_t n = N->dim();
  if (Y->dim() != n + 1 || !N->is_prefix_of(*Y) || !Y->is_circle(n))
    throw ModelMismatch("r must live on N x S^1 with the circle last");
  const ScalarField rho = r.coefficient({static_cast<int>(n)});
  if (!(r == rho * DifferentialForm::dx(Y, n))) throw DegreeError("r must be a multiple of dq");
  const ScalarField h = rho.circle_average(n).restrict_to(N);
  const DifferentialForm dh = ext_d(DifferentialForm(h));
  const DifferentialForm crit = ext_d(endo_dual(endo_from_pair(omega_N, F_N), dh));
  const DifferentialForm lie = lie_derivative(sharp(omega_N, dh), F_N);
  Verdict v("upsilon_image");
  v.add(exact_condition("image_criterion", crit.max_abs_coefficient(), crit.is_zero() ? "" : crit.to_string()));
  v.add(exact_condition("lie_reformulation", lie.max_abs_coefficient(), lie.is_zero() ? "" : lie.to_string()));
  return v;
}

// ---------------------------------------------------------------------------
// Truncated complex

namespace {

std::vector<std::vector<int>> canonical_frequencies(std::size_t dim, int T) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(dim, -T);
  if (dim == 0) return {{}};
  while (true) {
    // canonical: zero, or first non-zero entry positive
    auto nz = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
    if (nz == k.end() || *nz > 0) out.push_back(k);
    std::size_t i = 0;
    while (i < dim && k[i] == T) k[i++] = -T;
    if (i == dim) break;
    ++k[i];
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int na = 0, nb = 0;
    for (int v : a) na += std::abs(v);
    for (int v : b) nb += std::abs(v);
    return na != nb ? na < nb : a < b;
  });
  return out;
}

std::vector<std::vector<int>> increasing_indices(int n, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(degree));
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == degree) {
      out.push_back(idx);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[static_cast<std::size_t>(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

struct BlockCoords {
  std::vector<int> freq;
  std::vector<Phase> phases;

  // Coefficients of f on the block's cos/sin modes; throws if f leaves it.
  void extract(const ScalarField& f, double* out) const {
    std::size_t found = 0;
    for (std::size_t p = 0; p < phases.size(); ++p) {
      Monomial m{std::vector<int>(freq.size(), 0), freq, phases[p]};
      out[p] = f.coefficient(m);
      if (out[p] != 0.0) ++found;
    }
    if (found != f.size()) throw ModelError("operator output leaves its Fourier block; truncation too small");
  }
};

std::string mode_label(const ModelPtr& m, const std::vector<int>& k, Phase p) {
  return ScalarField::trig(m, k, p).to_string();
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

}  // namespace

Eigen::MatrixXd ComplexSlice::dense_d0() const {
  Eigen::Index r = 0, cc = 0;
  for (const auto& b : blocks) {
    r += b.d0.rows();
    cc += b.d0.cols();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, cc);
  r = cc = 0;
  for (const auto& b : blocks) {
    out.block(r, cc, b.d0.rows(), b.d0.cols()) = b.d0;
    r += b.d0.rows();
    cc += b.d0.cols();
  }
  return out;
}

Eigen::MatrixXd ComplexSlice::dense_d1() const {
  Eigen::Index r = 0, cc = 0;
  for (const auto& b : blocks) {
    r += b.d1.rows();
    cc += b.d1.cols();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, cc);
  r = cc = 0;
  for (const auto& b : blocks) {
    out.block(r, cc, b.d1.rows(), b.d1.cols()) = b.d1;
    r += b.d1.rows();
    cc += b.d1.cols();
  }
  return out;
}

ComplexSlice complex_slice(const BraneCandidate& c, int truncation, double rank_rel) {
  if (truncation < 0) throw ModelError("truncation must be non-negative");
  const ModelPtr& Y = c.model;
  if (!Y->all_circles()) throw ModelError("complex_slice needs a chart made of circles");
  if (!c.omega.is_constant() || !c.F.is_constant() || !c.E.is_constant() || !c.G.is_constant())
    throw NonConstantForm("complex_slice needs constant coefficients");
  const int n = static_cast<int>(Y->dim());
  const std::size_t k = c.E.rank();
  const auto two = increasing_indices(n, 2), three = increasing_indices(n, 3);
  const auto ee = increasing_indices(static_cast<int>(k), 2);
  const FieldMatrix WGinv = restrict_to_frame(c.omega, c.G).inverse_constant();
  const bool involutive = is_involutive_complement(c);
  (void)involutive;  // the full quadratic identity is used for constraints

  ComplexSlice s;
  s.truncation = truncation;
  s.model = Y;
  const std::size_t amb_slots = k + two.size(), c2_slots = ee.size() + three.size();

  for (const auto& freq : canonical_frequencies(Y->dim(), truncation)) {
    BlockCoords bc{freq, {}};
    const bool zero = std::all_of(freq.begin(), freq.end(), [](int v) { return v == 0; });
    bc.phases = zero ? std::vector<Phase>{Phase::Cos} : std::vector<Phase>{Phase::Cos, Phase::Sin};
    const auto P = static_cast<Eigen::Index>(bc.phases.size());
    ComplexBlock blk;
    blk.freq = freq;
    const auto amb = static_cast<Eigen::Index>(amb_slots) * P;
    blk.d0 = Eigen::MatrixXd::Zero(amb, P);
    blk.d1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c2_slots) * P, amb);
    const std::size_t m = c.G.rank();
    const std::size_t cons_slots = k * k + k * m + m * m;
    blk.constraints = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cons_slots) * P, amb);

    for (Eigen::Index p = 0; p < P; ++p) {
      const std::string lbl = mode_label(Y, freq, bc.phases[static_cast<std::size_t>(p)]);
      s.c0_basis.push_back(lbl);
      for (std::size_t a = 0; a < k; ++a) s.c1_basis.push_back("rho" + std::to_string(a) + ":" + lbl);
      for (const auto& idx : two)
        s.c1_basis.push_back(DifferentialForm::monomial(ScalarField::constant(Y, 1.0), idx).to_string() + ":" + lbl);
      for (const auto& idx : ee) s.c2_basis.push_back("dE" + std::to_string(idx[0]) + std::to_string(idx[1]) + ":" + lbl);
      for (const auto& idx : three)
        s.c2_basis.push_back(DifferentialForm::monomial(ScalarField::constant(Y, 1.0), idx).to_string() + ":" + lbl);
    }
    // Ambient coordinates of a pair; slot-major, phase-minor.
    auto ambient = [&](const InfDefPair& pr, Eigen::Ref<Eigen::VectorXd> out) {
      std::vector<double> buf(static_cast<std::size_t>(P));
      for (std::size_t a = 0; a < k; ++a) {
        bc.extract(pr.rho[a], buf.data());
        for (Eigen::Index q = 0; q < P; ++q) out(static_cast<Eigen::Index>(a) * P + q) = buf[static_cast<std::size_t>(q)];
      }
      for (std::size_t t = 0; t < two.size(); ++t) {
        bc.extract(pr.B.coefficient(two[t]), buf.data());
        for (Eigen::Index q = 0; q < P; ++q)
          out(static_cast<Eigen::Index>(k + t) * P + q) = buf[static_cast<std::size_t>(q)];
      }
    };
    auto matrix_rows = [&](const FieldMatrix& M, std::size_t& slot, Eigen::Ref<Eigen::VectorXd> out) {
      std::vector<double> buf(static_cast<std::size_t>(P));
      for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j, ++slot) {
          bc.extract(M(i, j), buf.data());
          for (Eigen::Index q = 0; q < P; ++q) out(static_cast<Eigen::Index>(slot) * P + q) = buf[static_cast<std::size_t>(q)];
        }
    };

    for (Eigen::Index p = 0; p < P; ++p) {
      const ScalarField phi = ScalarField::trig(Y, freq, bc.phases[static_cast<std::size_t>(p)]);
      ambient(hamiltonian_generator(phi, c), blk.d0.col(p));
      // ambient basis elements carried by phi
      for (std::size_t slot = 0; slot < amb_slots; ++slot) {
        std::vector<ScalarField> rho(k, ScalarField(Y));
        DifferentialForm B(Y, 2);
        if (slot < k)
          rho[slot] = phi;
        else
          B = DifferentialForm::monomial(phi, two[slot - k]);
        const InfDefPair pr = InfDefPair::make(c, std::move(rho), std::move(B));
        const Eigen::Index col = static_cast<Eigen::Index>(slot) * P + p;
        const auto r = residuals(exact_blocks(pr, c, WGinv));
        std::size_t cs = 0;
        auto ccol = blk.constraints.col(col);
        matrix_rows(r.B_horizontal, cs, ccol);
        matrix_rows(r.mixed, cs, ccol);
        matrix_rows(r.quad, cs, ccol);
        // d1 = d_E r (+) dB
        std::vector<double> buf(static_cast<std::size_t>(P));
        const DifferentialForm D = ee.empty() ? pr.r_bar : ext_d(pr.r_bar);
        const DifferentialForm dB = three.empty() ? pr.B : ext_d(pr.B);
        auto dcol = blk.d1.col(col);
        std::size_t row = 0;
        for (const auto& ab : ee) {
          bc.extract(apply_form(D, {c.E[static_cast<std::size_t>(ab[0])], c.E[static_cast<std::size_t>(ab[1])]}),
                     buf.data());
          for (Eigen::Index q = 0; q < P; ++q) dcol(static_cast<Eigen::Index>(row) * P + q) = buf[static_cast<std::size_t>(q)];
          ++row;
        }
        for (const auto& idx : three) {
          bc.extract(dB.coefficient(idx), buf.data());
          for (Eigen::Index q = 0; q < P; ++q) dcol(static_cast<Eigen::Index>(row) * P + q) = buf[static_cast<std::size_t>(q)];
          ++row;
        }
      }
    }
    s.blocks.push_back(std::move(blk));
  }

  // Ranks with family-wide thresholds.
  std::vector<Eigen::VectorXd> sv_d0, sv_cons, sv_stack;
  double max_d0 = 0, max_cons = 0, max_stack = 0;
  for (const auto& b : s.blocks) {
    Eigen::MatrixXd stack(b.constraints.rows() + b.d1.rows(), b.d1.cols());
    stack << b.constraints, b.d1;
    sv_d0.push_back(singular_values(b.d0));
    sv_cons.push_back(singular_values(b.constraints));
    sv_stack.push_back(singular_values(stack));
    if (sv_d0.back().size()) max_d0 = std::max(max_d0, sv_d0.back().maxCoeff());
    if (sv_cons.back().size()) max_cons = std::max(max_cons, sv_cons.back().maxCoeff());
    if (sv_stack.back().size()) max_stack = std::max(max_stack, sv_stack.back().maxCoeff());
    s.d1_d0_residual = std::max(s.d1_d0_residual, max_abs(b.d1 * b.d0));
    s.cocycle_residual = std::max(s.cocycle_residual, max_abs(b.constraints * b.d0));
  }
  auto count = [](const Eigen::VectorXd& sv, double cut) {
    return static_cast<Eigen::Index>((sv.array() > cut).count());
  };
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const auto cols = s.blocks[i].d1.cols();
    s.rank_d0 += count(sv_d0[i], rank_rel * std::max(1.0, max_d0));
    s.dim_c1 += cols - count(sv_cons[i], rank_rel * std::max(1.0, max_cons));
    s.ker_d1 += cols - count(sv_stack[i], rank_rel * std::max(1.0, max_stack));
  }
  s.h1 = s.ker_d1 - s.rank_d0;
  return s;
}

}  // namespace branelab
