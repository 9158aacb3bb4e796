#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "branelab_tools/runner.hpp"

namespace {

using namespace branelab;
using report::Json;

std::filesystem::path scene_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BRANELAB_SCENES")) return env;
  return BRANELAB_SCENE_DIR;
}

/// Writes to `path`, or stdout when empty.
bool emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "branelab: cannot write " << path << "\n";
    return false;
  }
  out << text;
  return true;
}

int cmd_run(const std::string& path, const scene::RunOptions& opts, const std::string& format, const std::string& out) {
  const scene::Scene sc = scene::load_scene(path);
  const report::Report rep = scene::run(sc, opts, path);
  std::ostringstream ss;
  rep.write(ss, report::parse_format(format));
  if (!emit(out, ss.str())) return 2;
  return rep.pass() ? 0 : 1;
}

int cmd_examples(const std::string& dir) {
  const auto rows = scene::catalog(scene_dir(dir));
  for (const auto& r : rows) {
    std::cout << r.file << "  ";
    if (r.valid)
      std::cout << r.about << "\n";
    else
      std::cout << "INVALID: " << r.error << "\n";
  }
  return 0;
}

struct InfdefArgs {
  std::string pair, candidate, B = "0", out;
  std::vector<std::string> rho;
  int truncation = -1;
};

int cmd_infdef(const std::string& path, const InfdefArgs& a, const scene::RunOptions& opts) {
  const scene::Scene sc = scene::load_scene(path);
  const scene::Settings st = scene::effective_settings(sc, opts);
  SamplePlan plan;
  plan.count = st.samples;
  plan.seed = st.seed;
  plan.line_half_width = st.line_half_width;
  plan.tol = st.tol;
  plan.parallel = opts.parallel;

  std::string cand_name = a.candidate;
  if (!a.pair.empty()) {
    for (const auto& p : sc.pairs)
      if (p.name == a.pair) cand_name = p.candidate;
    if (cand_name.empty()) throw scene::SceneError("unknown pair '" + a.pair + "'", 0);
  }
  const BraneCandidate c = sc.candidate(cand_name);
  InfDefPair pair = [&] {
    if (!a.pair.empty()) return sc.pair(a.pair);
    std::vector<ScalarField> rho;
    for (const auto& r : a.rho) rho.push_back(sc.function(r, c.model));
    if (rho.empty()) rho.assign(c.E.rank(), ScalarField(c.model));
    return InfDefPair::make(c, std::move(rho), sc.form(a.B, c.model, 2));
  }();

  Json j;
  j["scene"] = sc.name;
  j["candidate"] = cand_name;
  Json rho = Json::array();
  for (const auto& r : pair.rho) rho.push_back(r.to_string());
  j["pair"] = {{"rho", rho}, {"B", pair.B.to_string()}};
  const Verdict v1 = check_infdef(pair, c, plan);
  const Verdict v2 = infdef_general_check(pair, c, plan);
  j["infdef"] = report::to_json(v1);
  j["infdef_general"] = report::to_json(v2);
  bool pass = v1.pass && v2.pass;
  if (a.truncation >= 0) {
    const ComplexSlice s = complex_slice(c, a.truncation, st.tol.rank_rel);
    j["complex_slice"] = {{"truncation", s.truncation}, {"dim_c1", s.dim_c1},   {"ker_d1", s.ker_d1},
                          {"rank_d0", s.rank_d0},       {"h1", s.h1},           {"d1_d0_residual", s.d1_d0_residual},
                          {"cocycle_residual", s.cocycle_residual}};
    pass = pass && s.d1_d0_residual <= 1e-10;
  }
  j["pass"] = pass;
  if (!emit(a.out, j.dump(2) + "\n")) return 2;
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brane checks on explicit coordinate models"};
  app.require_subcommand(1);

  scene::RunOptions opts;
  std::uint64_t seed = 0;
  double tol = 0;
  int steps = 0;
  std::size_t q_grid = 0;
  std::string format = "json", out, dir, path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scene", path, "Scene file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Sample seed");
    sub->add_option("--tol", tol, "Pointwise tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Write the report here instead of stdout");
    sub->add_flag("--parallel", opts.parallel, "Run checks and sample loops concurrently");
  };

  auto* run = app.add_subcommand("run", "Run the checks of a scene");
  add_common(run);
  run->add_option("--steps", steps, "RK4 steps per unit of q")->check(CLI::PositiveNumber);
  run->add_option("--q-grid", q_grid, "Transport grid cells")->check(CLI::PositiveNumber);
  run->add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));

  auto* ex = app.add_subcommand("examples", "List bundled scenes");
  ex->add_option("--dir", dir, "Scene directory");

  InfdefArgs ia;
  auto* inf = app.add_subcommand("infdef", "Check one infinitesimal deformation of a scene candidate");
  add_common(inf);
  auto* pair_opt = inf->add_option("--pair", ia.pair, "Pair declared in the scene");
  auto* cand_opt = inf->add_option("--candidate", ia.candidate, "Candidate declared in the scene");
  inf->add_option("--rho", ia.rho, "Function per E frame field (name or expression)")->needs(cand_opt);
  inf->add_option("--B", ia.B, "2-form (name or expression)")->needs(cand_opt);
  inf->add_option("--truncation", ia.truncation, "Also compute the truncated complex");
  pair_opt->excludes(cand_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto set_flags = [&](CLI::App* sub) {
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--tol")) opts.tol = tol;
    if (sub == run && sub->count("--steps")) opts.steps = steps;
    if (sub == run && sub->count("--q-grid")) opts.q_grid = q_grid;
  };

  try {
    if (run->parsed()) {
      set_flags(run);
      return cmd_run(path, opts, format, out);
    }
    if (ex->parsed()) return cmd_examples(dir);
    if (inf->parsed()) {
      set_flags(inf);
      if (ia.pair.empty() && ia.candidate.empty()) {
        std::cerr << "branelab infdef: give --pair or --candidate\n";
        return 2;
      }
      ia.out = out;
      return cmd_infdef(path, ia, opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "branelab: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
