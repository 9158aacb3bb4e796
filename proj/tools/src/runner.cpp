#include "branelab_tools/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

namespace branelab::scene {

namespace {

using report::Json;

SamplePlan plan_from(const Settings& s, bool parallel) {
  SamplePlan p;
  p.count = s.samples;
  p.seed = s.seed;
  p.line_half_width = s.line_half_width;
  p.tol = s.tol;
  p.parallel = parallel;
  return p;
}

double number_arg(const SceneCheck& c, const std::string& key, double fallback) {
  const auto v = c.arg(key);
  if (!v) return fallback;
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v->size()) throw SceneError(key + "=" + *v + " is not a number", c.line);
  return out;
}

std::string need(const SceneCheck& c, const std::string& key) { return *c.arg(key); }

std::vector<std::string> list_arg(const SceneCheck& c, const std::string& key) {
  std::vector<std::string> out;
  const std::string s = need(c, key);
  std::size_t start = 0;
  while (!s.empty()) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

FlowOptions flow_options(const Settings& s, bool parallel) {
  FlowOptions o;
  o.steps_per_unit = s.steps;
  o.parallel = parallel;
  return o;
}

TransportOptions transport_options(const Settings& s, bool parallel) {
  TransportOptions o;
  o.q_grid = s.q_grid;
  o.flow = flow_options(s, parallel);
  o.plan = plan_from(s, parallel);
  o.tol = s.tol.sample;
  return o;
}

/// The base chart N of a candidate declared on `N x q:circle`.
ModelPtr base_of(const Scene& sc, const std::string& candidate, int line) {
  const auto& decl = sc.candidate_decl(candidate);
  for (const auto& m : sc.models)
    if (m.name == decl.model) {
      if (m.base.empty()) throw SceneError("candidate '" + candidate + "' is not declared on a product with a circle", line);
      return sc.model(m.base);
    }
  throw SceneError("unknown model '" + decl.model + "'", line);
}

Verdict flow_verdict(const Scene& sc, const Settings& st, const SceneCheck& c, bool parallel, Json& data) {
  const GraphDeformation g = sc.deformation(need(c, "deformation"));
  SamplePlan p = plan_from(st, parallel);
  p.count = static_cast<std::size_t>(number_arg(c, "points", static_cast<double>(st.samples)));
  const double q0 = number_arg(c, "q0", 0.0), q1 = number_arg(c, "q1", 1.0);
  const FlowResult r = flow(g, q0, q1, p.points(*g.N_model), flow_options(st, parallel));
  data["steps"] = r.steps;
  data["h"] = r.h;
  data["max_error_estimate"] = r.max_error_estimate();
  data["max_symplectic_residual"] = r.max_symplectic_residual();
  if (const auto table = c.arg("table")) {
    std::ofstream out(*table);
    if (!out) throw SceneError("cannot write " + *table, c.line);
    r.write_csv(out);
    data["table"] = *table;
  }
  Verdict v("flow");
  SampleTracker err("error_estimate", st.tol.sample), sym("symplectic", st.tol.sample);
  for (const auto& s : r.samples) {
    err.observe(s.point, s.error_estimate);
    sym.observe(s.point, s.symplectic_residual);
  }
  v.add(err.finish());
  v.add(sym.finish());
  if (const auto shift = c.arg("shift")) {
    const VectorField expected = sc.vector(*shift, g.N_model);
    SampleTracker sh("shift", st.tol.sample);
    for (const auto& s : r.samples) {
      const auto e = expected.eval(s.point);
      double worst = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) worst = std::max(worst, std::abs(s.displacement[i] - e[i]));
      sh.observe(s.point, worst);
    }
    v.add(sh.finish());
  }
  return v;
}

Verdict slice_verdict(const Scene& sc, const Settings& st, const SceneCheck& c, Json& data) {
  const BraneCandidate cand = sc.candidate(need(c, "candidate"));
  const double T = number_arg(c, "truncation", 0);
  if (T < 0 || T != std::floor(T)) throw SceneError("truncation must be a non-negative integer", c.line);
  const ComplexSlice s = complex_slice(cand, static_cast<int>(T), st.tol.rank_rel);
  data["truncation"] = s.truncation;
  data["dim_c1"] = s.dim_c1;
  data["ker_d1"] = s.ker_d1;
  data["rank_d0"] = s.rank_d0;
  data["h1"] = s.h1;
  Verdict v("complex_slice");
  Condition d = exact_condition("d1_d0", 0.0, "numerical ranks on exact coefficients");
  d.residual = s.d1_d0_residual;
  d.pass = s.d1_d0_residual <= 1e-10;
  v.add(d);
  Condition k = exact_condition("cocycle", 0.0);
  k.residual = s.cocycle_residual;
  k.pass = s.cocycle_residual <= 1e-10;
  v.add(k);
  if (c.arg("h1")) {
    const double expected = number_arg(c, "h1", 0);
    v.add(exact_condition("h1", std::abs(static_cast<double>(s.h1) - expected),
                          "expected " + std::to_string(static_cast<long>(expected))));
  }
  return v;
}

Verdict dispatch(const Scene& sc, const Settings& st, const SceneCheck& c, bool parallel, Json& data) {
  const SamplePlan plan = plan_from(st, parallel);
  const std::string& op = c.op;
  if (op == "space_filling") {
    const DifferentialForm omega = sc.form(need(c, "omega"), nullptr, 2);
    const DifferentialForm F = sc.form(need(c, "F"), omega.model(), 2);
    Verdict v = check_space_filling(omega, F, plan);
    try {
      const auto I = endo_from_pair(omega, F);
      if (I.is_constant()) data["I"] = matrix_json(I.constant_value());
    } catch (const Error&) {
    }
    return v;
  }
  if (op == "type11") {
    const DifferentialForm omega = sc.form(need(c, "omega"), nullptr, 2);
    const DifferentialForm F = sc.form(need(c, "F"), omega.model(), 2);
    return is_type_11(sc.form(need(c, "B"), omega.model(), 2), endo_from_pair(omega, F));
  }
  if (op == "brane") return check_brane(sc.candidate(need(c, "candidate")), plan);
  if (op == "brane_via_J") {
    const BraneCandidate cand = sc.candidate(need(c, "candidate"));
    return check_brane_via_J(cand, AmbientModel::gotay(cand), plan);
  }
  if (op == "flow") return flow_verdict(sc, st, c, parallel, data);
  if (op == "invariance") {
    const GraphDeformation g = sc.deformation(need(c, "deformation"));
    if (!g.F_N) throw SceneError("deformation needs F=", c.line);
    SamplePlan p = plan;
    p.count = static_cast<std::size_t>(number_arg(c, "points", static_cast<double>(st.samples)));
    const FlowResult r = flow(g, 0.0, 1.0, p.points(*g.N_model), flow_options(st, parallel));
    return invariance_check(*g.F_N, r, st.tol.sample);
  }
  if (op == "transport") {
    const GraphDeformation g = sc.deformation(need(c, "deformation"));
    if (!g.F_N) throw SceneError("deformation needs F=", c.line);
    const TransportedForm t = transport_brane(g, *g.F_N, transport_options(st, parallel));
    data["transport_mode"] = to_string(t.mode());
    data["q_grid"] = t.q_grid();
    if (t.exact()) data["form"] = t.exact()->to_string();
    return t.verify(plan, number_arg(c, "fd_step", 1e-4));
  }
  if (op == "closed1f") {
    const GraphDeformation g = sc.deformation(need(c, "deformation"));
    if (!g.F_N) throw SceneError("deformation needs F=", c.line);
    data["istar_df"] = istar_df(g, *g.F_N).to_string();
    try {
      Json eqs = Json::array();
      for (const auto& e : four_equations(g.f)) eqs.push_back(e.to_string());
      data["equations"] = std::move(eqs);
    } catch (const Error&) {
    }
    return closed1f_check(g, *g.F_N);
  }
  if (op == "mapping_torus") {
    const GraphDeformation g = sc.deformation(need(c, "deformation"));
    if (!g.F_N) throw SceneError("deformation needs F=", c.line);
    return mapping_torus_check(g, *g.F_N, plan, transport_options(st, parallel));
  }
  if (op == "holonomy") {
    const DifferentialForm F = sc.form(need(c, "F"), nullptr, 2);
    std::vector<VectorField> E, G;
    for (const auto& e : list_arg(c, "E")) E.push_back(sc.vector(e, F.model()));
    for (const auto& g : list_arg(c, "G")) G.push_back(sc.vector(g, F.model()));
    return melanie_check(F, Distribution(F.model(), E), Distribution(F.model(), G), plan);
  }
  if (op == "infdef") {
    const std::string& name = need(c, "pair");
    for (const auto& p : sc.pairs)
      if (p.name == name) return check_infdef(sc.pair(name), sc.candidate(p.candidate), plan);
  }
  if (op == "infdef_general") {
    const std::string& name = need(c, "pair");
    for (const auto& p : sc.pairs)
      if (p.name == name) return infdef_general_check(sc.pair(name), sc.candidate(p.candidate), plan);
  }
  if (op == "cocycle") {
    const BraneCandidate cand = sc.candidate(need(c, "candidate"));
    const InfDefPair p = hamiltonian_generator(sc.function(need(c, "f"), cand.model), cand);
    data["B"] = p.B.to_string();
    return check_infdef(p, cand, plan);
  }
  if (op == "build_infdef") {
    const std::string name = need(c, "candidate");
    const BraneCandidate cand = sc.candidate(name);
    const ModelPtr N = base_of(sc, name, c.line);
    const InfDefPair p = build_infdef(sc.function(need(c, "rho"), cand.model), sc.form(need(c, "B0"), N, 2), cand);
    data["B"] = p.B.to_string();
    return check_infdef(p, cand, plan);
  }
  if (op == "upsilon_image") {
    const DifferentialForm omega = sc.form(need(c, "omega"), nullptr, 2);
    const DifferentialForm F = sc.form(need(c, "F"), omega.model(), 2);
    const DifferentialForm r = sc.form(need(c, "r"), nullptr, 1);
    return upsilon_image_check(r, omega, F);
  }
  if (op == "complex_slice") return slice_verdict(sc, st, c, data);
  throw SceneError("unknown check '" + op + "'", c.line);
}

}  // namespace

Settings effective_settings(const Scene& s, const RunOptions& o) {
  Settings out = s.settings;
  if (o.seed) out.seed = *o.seed;
  if (o.tol) out.tol.sample = *o.tol;
  if (o.steps) out.steps = *o.steps;
  if (o.q_grid) out.q_grid = *o.q_grid;
  return out;
}

report::CheckRecord run_check(const Scene& scene, const Settings& settings, const SceneCheck& check,
                              std::size_t index, bool parallel) {
  report::CheckRecord r;
  r.index = index;
  r.name = check.label;
  r.op = check.op;
  r.line = check.line;
  r.args = check.args;
  r.expect_pass = check.expect_pass;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Verdict v = dispatch(scene, settings, check, parallel, r.data);
    r.mode = v.mode;
    r.verdict_pass = v.pass;
    r.conditions = std::move(v.conditions);
    if (!v.detail.empty()) r.data["detail"] = v.detail;
  } catch (const std::exception& e) {
    r.verdict_pass = false;
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = r.verdict_pass == r.expect_pass;
  return r;
}

report::Report run(const Scene& scene, const RunOptions& opts, const std::string& source) {
  const Settings st = effective_settings(scene, opts);
  report::Report rep;
  rep.scene = scene.name;
  rep.source = source;
  rep.about = scene.about;
  rep.seed = st.seed;
  rep.samples = st.samples;
  rep.tol = st.tol;
  rep.steps = st.steps;
  rep.q_grid = st.q_grid;
  if (opts.parallel) {
    std::vector<std::future<report::CheckRecord>> jobs;
    for (std::size_t i = 0; i < scene.checks.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] { return run_check(scene, st, scene.checks[i], i, true); }));
    for (auto& j : jobs) rep.records.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < scene.checks.size(); ++i) rep.records.push_back(run_check(scene, st, scene.checks[i], i));
  }
  return rep;
}

}  // namespace branelab::scene
