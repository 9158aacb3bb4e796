#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "branelab_tools/runner.hpp"

using namespace branelab;
namespace fs = std::filesystem;

namespace {

const fs::path kScenes = BRANELAB_SCENE_DIR;

const char* kSmall = R"(# a comment
scene small
about two checks on T^4
seed 3
samples 32
tol sample 1e-9

model T4 = x1:circle x2:circle y1:circle y2:circle
model Y = T4 x q:circle
form omega on T4 = dx1^dy2 + dy1^dx2   # imaginary part
form F on T4 = dx1^dx2 - dy1^dy2
function h on Y = 0.5*cos(2*pi*(x1 - q))
vector e on Y = d/dq
candidate main on Y omega=omega F=F E=e G=d/dx1,d/dx2,d/dy1,d/dy2
pair p candidate=main rho=h B=dx1^dy1

check space_filling omega=omega F=F
check infdef name=pair_check pair=p expect=fail
)";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& file, const std::string& text) const { std::ofstream(path / file) << text; }
};

template <class Fn>
void check_parse_error(Fn&& fn, int line, int column) {
  try {
    fn();
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
    CHECK(e.column() == column);
  }
}

}  // namespace

TEST_CASE("scene parsing") {
  const auto s = scene::parse_scene(kSmall);
  CHECK(s.name == "small");
  CHECK(s.about == "two checks on T^4");
  CHECK(s.settings.seed == 3);
  CHECK(s.settings.samples == 32);
  CHECK(s.settings.tol.sample == 1e-9);
  CHECK(s.models.size() == 2);
  CHECK(s.model("Y")->dim() == 5);
  CHECK(s.model("Y")->q_index() == 4);
  CHECK(s.objects.size() == 4);
  CHECK(s.checks.size() == 2);
  CHECK(s.checks[1].label == "pair_check");
  CHECK_FALSE(s.checks[1].expect_pass);
  const auto c = s.candidate("main");
  CHECK(c.E.rank() == 1);
  CHECK(c.G.rank() == 4);
  CHECK(c.omega == s.form("omega").extend_to(c.model));
  const auto p = s.pair("p");
  CHECK(p.rho[0] == s.function("h", c.model));
}

TEST_CASE("round trip is canonical") {
  auto check_fixpoint = [](const std::string& text) {
    const auto a = scene::parse_scene(text);
    const std::string once = scene::serialize(a);
    const auto b = scene::parse_scene(once);
    CHECK(scene::serialize(b) == once);
    REQUIRE(a.objects.size() == b.objects.size());
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
      CHECK(a.objects[i].name == b.objects[i].name);
      CHECK(a.objects[i].text() == b.objects[i].text());
      if (a.objects[i].form) CHECK(*a.objects[i].form == *b.objects[i].form);
      if (a.objects[i].vector) CHECK(*a.objects[i].vector == *b.objects[i].vector);
    }
    CHECK(a.checks.size() == b.checks.size());
    CHECK(a.settings.tol.sample == b.settings.tol.sample);
  };
  check_fixpoint(kSmall);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(kScenes)) {
    if (e.path().extension() != ".scene") continue;
    std::ifstream in(e.path());
    std::stringstream ss;
    ss << in.rdbuf();
    INFO(e.path().string());
    check_fixpoint(ss.str());
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("parse errors carry line and column") {
  check_parse_error([] { scene::parse_scene("scene a\nbogus 1\n"); }, 2, 1);
  check_parse_error([] { scene::parse_scene("scene a\nseed x\n"); }, 2, 6);
  check_parse_error([] { scene::parse_scene("scene a\nmodel M = x1:torus\n"); }, 2, 14);
  // column inside the expression
  check_parse_error([] { scene::parse_scene("scene a\nmodel M = x1:line\nform w on M = dx1 + )\n"); }, 3, 21);
  check_parse_error([] { scene::parse_scene("scene a\nmodel M = x1:line\ncheck frobnicate x=1\n"); }, 3, 7);
  check_parse_error([] { scene::parse_scene("scene a\nmodel M = x1:line\ncheck brane\n"); }, 3, 7);
  check_parse_error([] { scene::parse_scene("scene a\nmodel M = x1:line\nmodel M = x2:line\n"); }, 3, 7);
  check_parse_error([] { scene::parse_scene("model M = x1:line\n"); }, 1, 1);
}

TEST_CASE("unresolved references") {
  const std::string head = "scene a\nmodel M = x1:line y1:line\nform w on M = dx1^dy1\n";
  CHECK_THROWS_AS(scene::parse_scene(head + "form v on N = dx1\n"), scene::SceneError);
  try {
    scene::parse_scene(head + "\ncheck brane candidate=nope\n");
    FAIL("expected SceneError");
  } catch (const scene::SceneError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(scene::parse_scene(head + "candidate c on M omega=w F=missing E= G=d/dx1,d/dy1\n"),
                  scene::SceneError);
  CHECK_THROWS_AS(scene::parse_scene(head + "pair p candidate=nope rho= B=0\n"), scene::SceneError);
}

TEST_CASE("run orchestration and expectations") {
  const auto s = scene::parse_scene(kSmall);
  const auto rep = scene::run(s);
  REQUIRE(rep.records.size() == 2);
  CHECK(rep.records[0].pass);
  CHECK(rep.records[0].mode == Mode::Exact);
  CHECK(rep.records[0].data.contains("I"));
  // rho = 0.5 cos(2 pi (x1 - q)) with B = dx1^dy1 breaks the mixed condition
  CHECK_FALSE(rep.records[1].verdict_pass);
  CHECK(rep.records[1].pass);
  CHECK(rep.pass());
  CHECK(rep.seed == 3);

  scene::RunOptions o;
  o.seed = 11;
  o.tol = 1e-6;
  o.steps = 64;
  o.q_grid = 8;
  const auto rep2 = scene::run(s, o);
  CHECK(rep2.seed == 11);
  CHECK(rep2.tol.sample == 1e-6);
  CHECK(rep2.steps == 64);
  CHECK(rep2.q_grid == 8);
}

TEST_CASE("check errors become failed records") {
  const auto s = scene::parse_scene(
      "scene a\nmodel N = x1:circle x2:line y1:line y2:line\n"
      "form w on N = dx1^dy2 + dy1^dx2\n"
      "deformation g omega=w f=y2\n"
      "check transport deformation=g\n"
      "check flow deformation=g points=nan_points\n");
  const auto rep = scene::run(s);
  REQUIRE(rep.records.size() == 2);
  for (const auto& r : rep.records) {
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.error.empty());
  }
  CHECK_FALSE(rep.pass());
  CHECK(rep.to_json()["checks"][0]["error"].get<std::string>().find("F=") != std::string::npos);
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"lambda_shear.scene", "infdef_torus.scene", "example_r4.scene"}) {
    const auto s = scene::load_scene(kScenes / name);
    const auto a = scene::run(s).to_json(false).dump();
    const auto b = scene::run(s).to_json(false).dump();
    scene::RunOptions par;
    par.parallel = true;
    const auto c = scene::run(s, par).to_json(false).dump();
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("output formats") {
  const auto rep = scene::run(scene::parse_scene(kSmall));
  std::ostringstream js, csv, txt;
  rep.write(js, report::Format::Json);
  rep.write(csv, report::Format::Csv);
  rep.write(txt, report::Format::Text);
  const auto j = report::Json::parse(js.str());
  CHECK(j["summary"]["checks"] == 2);
  CHECK(j["summary"]["pass"] == true);
  CHECK(j["checks"][1]["expect"] == "fail");
  CHECK(j["checks"][0]["residuals"].contains("closed_F"));
  CHECK(j["checks"][0].contains("wall_time"));
  std::size_t lines = 0;
  for (char ch : csv.str()) lines += ch == '\n';
  CHECK(lines == 3);
  CHECK(txt.str().find("2/2 checks passed") != std::string::npos);
  CHECK_THROWS(report::parse_format("xml"));
}

TEST_CASE("bundled scenes") {
  const auto rows = scene::catalog(kScenes);
  std::vector<std::string> names;
  for (const auto& r : rows) {
    INFO(r.file, ": ", r.error);
    CHECK(r.valid);
    CHECK_FALSE(r.about.empty());
    names.push_back(r.name);
  }
  for (const char* n : {"example_r4", "frame_11", "lambda_shear", "mapping_torus", "infdef_torus", "cohomology_t4",
                        "pde_failures", "cos2_obstruction"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());

  // every bundled scene except the obstruction passes
  for (const auto& r : rows) {
    const auto rep = scene::run(scene::load_scene(kScenes / r.file));
    INFO(r.file);
    CHECK(rep.pass() == (r.name != "cos2_obstruction"));
  }
}

TEST_CASE("catalog edge cases") {
  TempDir empty("branelab_catalog_empty");
  CHECK(scene::catalog(empty.path).empty());
  CHECK(scene::catalog(empty.path / "missing").empty());

  TempDir mixed("branelab_catalog_mixed");
  mixed.write("good.scene", "scene good\nabout fine\n");
  mixed.write("broken.scene", "scene broken\nabout nope\nmodel M = x1:blob\n");
  mixed.write("notes.txt", "ignored");
  const auto rows = scene::catalog(mixed.path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].file == "broken.scene");
  CHECK_FALSE(rows[0].valid);
  CHECK(rows[0].error.find("3:") != std::string::npos);
  CHECK(rows[1].valid);
  CHECK(rows[1].about == "fine");
}
