#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "branelab/branelab.hpp"

namespace branelab::scene {

/// A chart declared either by its coordinates or as `base x name:circle`.
struct SceneModel {
  std::string name;
  std::string base;  // empty for an explicit coordinate list
  std::vector<Coordinate> coords;
  ModelPtr model;
  int line = 0;
};

enum class ObjectKind { Form, Function, Vector };

struct SceneObject {
  std::string name;
  ObjectKind kind = ObjectKind::Form;
  std::string model;
  std::optional<DifferentialForm> form;  // functions are 0-forms
  std::optional<VectorField> vector;
  int line = 0;

  /// Canonical expression text.
  std::string text() const;
};

struct SceneCandidate {
  std::string name, model, omega, F;
  std::vector<std::string> E, G;  // vector names or space-free vector expressions
  int line = 0;
};

struct SceneDeformation {
  std::string name, omega, f;
  std::optional<std::string> F;
  int line = 0;
};

struct ScenePair {
  std::string name, candidate;
  std::vector<std::string> rho;  // function names or space-free expressions
  std::string B;
  int line = 0;
};

struct SceneCheck {
  std::string op;
  std::string label;  // `name=`; defaults to op
  std::vector<std::pair<std::string, std::string>> args;
  bool expect_pass = true;
  int line = 0;

  std::optional<std::string> arg(std::string_view key) const;
};

struct Settings {
  std::uint64_t seed = 0;
  std::size_t samples = 256;
  double line_half_width = 1.0;
  Tolerances tol;
  int steps = 1024;
  std::size_t q_grid = 64;
};

/// Parsed scene with every reference resolved.
struct Scene {
  std::string name;
  std::string about;
  Settings settings;
  std::vector<SceneModel> models;
  std::vector<SceneObject> objects;
  std::vector<SceneCandidate> candidates;
  std::vector<SceneDeformation> deformations;
  std::vector<ScenePair> pairs;
  std::vector<SceneCheck> checks;

  const ModelPtr& model(const std::string& name) const;
  const SceneObject& object(const std::string& name) const;
  const Symbols& symbols() const { return symbols_; }

  /// Resolved library values. Throw SceneError for unknown names.
  DifferentialForm form(const std::string& ref, const ModelPtr& on = nullptr, int degree = -1) const;
  ScalarField function(const std::string& ref, const ModelPtr& on) const;
  VectorField vector(const std::string& ref, const ModelPtr& on) const;
  BraneCandidate candidate(const std::string& name) const;
  GraphDeformation deformation(const std::string& name) const;
  InfDefPair pair(const std::string& name) const;
  const SceneCandidate& candidate_decl(const std::string& name) const;

  SamplePlan plan() const;

 private:
  friend Scene parse_scene(std::string_view, const std::string&);
  Symbols symbols_;
};

/// Unresolved reference or malformed declaration, with its line.
class SceneError : public Error {
 public:
  SceneError(const std::string& msg, int line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Grammar, one statement per line, `#` starts a comment:
///
///   scene <name>
///   about <text>
///   seed <int> | samples <int> | width <x> | steps <int> | q_grid <int>
///   tol <sample|fd|rank|cond|gram> <x>
///   model <name> = <coord>:<line|circle> ...
///   model <name> = <base> x <coord>:circle
///   form|function|vector <name> on <model> = <expression>
///   candidate <name> on <model> omega=<ref> F=<ref> E=<list> G=<list>
///   deformation <name> omega=<ref> f=<ref> [F=<ref>]
///   pair <name> candidate=<ref> rho=<list> B=<ref>
///   check <op> [name=<label>] [expect=pass|fail] [<key>=<value> ...]
///
/// Lists are comma separated without spaces. ParseError for grammar errors
/// (line and column), SceneError for unresolved references.
Scene parse_scene(std::string_view text, const std::string& source = "<scene>");
Scene load_scene(const std::filesystem::path& path);

/// Canonical text: settings, models, objects, candidates, deformations,
/// pairs and checks in declaration order, expressions in canonical form.
std::string serialize(const Scene& scene);

/// One catalog row per `*.scene` file in `dir` (sorted by file name).
struct CatalogEntry {
  std::string file;
  std::string name;
  std::string about;
  bool valid = true;
  std::string error;
};
std::vector<CatalogEntry> catalog(const std::filesystem::path& dir);

}  // namespace branelab::scene
