#include "branelab_tools/scene.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace branelab::scene {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> split(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const Token& t, int line) {
  T v{};
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError("expected a number, got '" + t.text + "'", line, t.column);
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

const char* kind_name(CoordKind k) { return k == CoordKind::Circle ? "circle" : "line"; }

Coordinate parse_coordinate(const Token& t, int line) {
  const auto colon = t.text.find(':');
  if (colon == std::string::npos) throw ParseError("expected <name>:<line|circle>", line, t.column);
  const std::string name = t.text.substr(0, colon), kind = t.text.substr(colon + 1);
  if (!is_identifier(name)) throw ParseError("bad coordinate name '" + name + "'", line, t.column);
  if (kind == "line") return {name, CoordKind::Line};
  if (kind == "circle") return {name, CoordKind::Circle};
  throw ParseError("coordinate kind must be line or circle", line, t.column + static_cast<int>(colon) + 1);
}

/// key=value arguments after position `from`.
std::map<std::string, Token> key_values(const std::vector<Token>& toks, std::size_t from, int line,
                                        std::vector<std::string>* order = nullptr) {
  std::map<std::string, Token> out;
  for (std::size_t i = from; i < toks.size(); ++i) {
    const auto eq = toks[i].text.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value", line, toks[i].column);
    const std::string key = toks[i].text.substr(0, eq);
    if (out.count(key)) throw ParseError("duplicate key '" + key + "'", line, toks[i].column);
    out[key] = {toks[i].text.substr(eq + 1), toks[i].column + static_cast<int>(eq) + 1};
    if (order) order->push_back(key);
  }
  return out;
}

const Token& require_key(const std::map<std::string, Token>& kv, const std::string& key, int line, int column) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("missing " + key + "=", line, column);
  return it->second;
}

void allow_keys(const std::map<std::string, Token>& kv, std::initializer_list<const char*> keys, int line) {
  for (const auto& [k, t] : kv)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      throw ParseError("unknown key '" + k + "'", line, t.column);
}

/// Required arguments of each check and which ones name scene entities.
struct OpSchema {
  std::vector<std::string> required, optional;
  std::vector<std::pair<std::string, char>> refs;  // 'c' candidate, 'd' deformation, 'p' pair
};

const std::map<std::string, OpSchema>& op_schemas() {
  static const std::map<std::string, OpSchema> s = {
      {"space_filling", {{"omega", "F"}, {}, {}}},
      {"type11", {{"B", "omega", "F"}, {}, {}}},
      {"brane", {{"candidate"}, {}, {{"candidate", 'c'}}}},
      {"brane_via_J", {{"candidate"}, {}, {{"candidate", 'c'}}}},
      {"flow", {{"deformation"}, {"q0", "q1", "shift", "points", "table"}, {{"deformation", 'd'}}}},
      {"invariance", {{"deformation"}, {"points"}, {{"deformation", 'd'}}}},
      {"transport", {{"deformation"}, {"fd_step"}, {{"deformation", 'd'}}}},
      {"closed1f", {{"deformation"}, {}, {{"deformation", 'd'}}}},
      {"mapping_torus", {{"deformation"}, {}, {{"deformation", 'd'}}}},
      {"holonomy", {{"F", "E", "G"}, {}, {}}},
      {"infdef", {{"pair"}, {}, {{"pair", 'p'}}}},
      {"infdef_general", {{"pair"}, {}, {{"pair", 'p'}}}},
      {"cocycle", {{"candidate", "f"}, {}, {{"candidate", 'c'}}}},
      {"build_infdef", {{"candidate", "rho", "B0"}, {}, {{"candidate", 'c'}}}},
      {"upsilon_image", {{"r", "omega", "F"}, {}, {}}},
      {"complex_slice", {{"candidate", "truncation"}, {"h1"}, {{"candidate", 'c'}}}},
  };
  return s;
}

}  // namespace

std::optional<std::string> SceneCheck::arg(std::string_view key) const {
  for (const auto& [k, v] : args)
    if (k == key) return v;
  return std::nullopt;
}

std::string SceneObject::text() const {
  if (kind == ObjectKind::Vector) return vector->to_string();
  return form->to_string();
}

const ModelPtr& Scene::model(const std::string& name) const {
  for (const auto& m : models)
    if (m.name == name) return m.model;
  throw SceneError("unknown model '" + name + "'", 0);
}

const SceneObject& Scene::object(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return o;
  throw SceneError("unknown object '" + name + "'", 0);
}

namespace {

const SceneObject* find_object(const std::vector<SceneObject>& objs, const std::string& name) {
  for (const auto& o : objs)
    if (o.name == name) return &o;
  return nullptr;
}

template <class T>
T move_to(const T& v, const ModelPtr& on, const std::string& ref) {
  if (!on || v.model()->same_chart(*on)) return v;
  if (v.model()->is_prefix_of(*on)) return v.extend_to(on);
  throw SceneError("'" + ref + "' does not live on the requested chart", 0);
}

}  // namespace

DifferentialForm Scene::form(const std::string& ref, const ModelPtr& on, int degree) const {
  DifferentialForm out = [&] {
    if (const auto* o = find_object(objects, ref)) {
      if (o->kind == ObjectKind::Vector) throw SceneError("'" + ref + "' is a vector, not a form", o->line);
      return move_to(*o->form, on, ref);
    }
    if (!on) throw SceneError("unknown form '" + ref + "'", 0);
    try {
      return parse_form(on, ref, -1, &symbols_);
    } catch (const ParseError& e) {
      throw SceneError("unresolved reference '" + ref + "' (" + e.what() + ")", 0);
    }
  }();
  if (degree >= 0 && out.degree() != degree && out.is_zero()) return DifferentialForm(out.model(), degree);
  if (degree >= 0 && out.degree() != degree)
    throw SceneError("'" + ref + "' has degree " + std::to_string(out.degree()) + ", expected " + std::to_string(degree), 0);
  return out;
}

ScalarField Scene::function(const std::string& ref, const ModelPtr& on) const {
  const DifferentialForm f = form(ref, on, 0);
  return f.coefficient({});
}

VectorField Scene::vector(const std::string& ref, const ModelPtr& on) const {
  if (const auto* o = find_object(objects, ref)) {
    if (o->kind != ObjectKind::Vector) throw SceneError("'" + ref + "' is not a vector", o->line);
    return move_to(*o->vector, on, ref);
  }
  try {
    return parse_vector(on, ref, &symbols_);
  } catch (const ParseError& e) {
    throw SceneError("unresolved reference '" + ref + "' (" + e.what() + ")", 0);
  }
}

const SceneCandidate& Scene::candidate_decl(const std::string& name) const {
  for (const auto& c : candidates)
    if (c.name == name) return c;
  throw SceneError("unknown candidate '" + name + "'", 0);
}

BraneCandidate Scene::candidate(const std::string& name) const {
  const auto& d = candidate_decl(name);
  const ModelPtr& Y = model(d.model);
  std::vector<VectorField> E, G;
  for (const auto& e : d.E) E.push_back(vector(e, Y));
  for (const auto& g : d.G) G.push_back(vector(g, Y));
  return BraneCandidate(d.name, form(d.omega, Y, 2), form(d.F, Y, 2), Distribution(Y, std::move(E)),
                        Distribution(Y, std::move(G)));
}

GraphDeformation Scene::deformation(const std::string& name) const {
  for (const auto& d : deformations) {
    if (d.name != name) continue;
    const DifferentialForm omega = form(d.omega, nullptr, 2);
    const ModelPtr& N = omega.model();
    ScalarField f = find_object(objects, d.f) ? function(d.f, nullptr) : function(d.f, N);
    std::optional<DifferentialForm> F;
    if (d.F) F = form(*d.F, N, 2);
    return GraphDeformation(omega, std::move(f), std::move(F));
  }
  throw SceneError("unknown deformation '" + name + "'", 0);
}

InfDefPair Scene::pair(const std::string& name) const {
  for (const auto& p : pairs) {
    if (p.name != name) continue;
    const BraneCandidate c = candidate(p.candidate);
    std::vector<ScalarField> rho;
    for (const auto& r : p.rho) rho.push_back(function(r, c.model));
    return InfDefPair::make(c, std::move(rho), form(p.B, c.model, 2));
  }
  throw SceneError("unknown pair '" + name + "'", 0);
}

SamplePlan Scene::plan() const {
  SamplePlan p;
  p.count = settings.samples;
  p.seed = settings.seed;
  p.line_half_width = settings.line_half_width;
  p.tol = settings.tol;
  return p;
}

Scene parse_scene(std::string_view text, const std::string& source) {
  Scene s;
  std::set<std::string> names;
  auto claim = [&](const Token& t, int line) {
    if (!is_identifier(t.text)) throw ParseError("bad name '" + t.text + "'", line, t.column);
    if (!names.insert(t.text).second) throw ParseError("duplicate name '" + t.text + "'", line, t.column);
  };
  auto model_ref = [&](const Token& t, int line) -> const ModelPtr& {
    for (const auto& m : s.models)
      if (m.name == t.text) return m.model;
    throw SceneError("unknown model '" + t.text + "'", line);
  };
  auto check_entity = [&](const std::string& name, char kind, int line) {
    bool ok = false;
    if (kind == 'c') ok = std::any_of(s.candidates.begin(), s.candidates.end(), [&](auto& c) { return c.name == name; });
    if (kind == 'd') ok = std::any_of(s.deformations.begin(), s.deformations.end(), [&](auto& c) { return c.name == name; });
    if (kind == 'p') ok = std::any_of(s.pairs.begin(), s.pairs.end(), [&](auto& c) { return c.name == name; });
    if (!ok) throw SceneError("unresolved reference '" + name + "'", line);
  };
  // Resolution errors from library calls are reported with the line.
  auto at_line = [](int line, auto&& fn) {
    try {
      return fn();
    } catch (const SceneError& e) {
      if (e.line() != 0) throw;
      throw SceneError(std::string(e.what()).substr(std::string("line 0: ").size()), line);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw SceneError(e.what(), line);
    }
  };

  int line_no = 0;
  std::size_t pos = 0;
  bool have_name = false;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto toks = split(raw);
    if (toks.empty()) continue;
    const std::string& kw = toks[0].text;
    const int L = line_no;
    auto need = [&](std::size_t n) {
      if (toks.size() < n) throw ParseError("incomplete '" + kw + "' statement", L, static_cast<int>(raw.size()) + 1);
    };

    if (kw == "scene") {
      need(2);
      if (toks.size() > 2) throw ParseError("unexpected token", L, toks[2].column);
      if (!is_identifier(toks[1].text)) throw ParseError("bad scene name", L, toks[1].column);
      s.name = toks[1].text;
      have_name = true;
    } else if (kw == "about") {
      need(2);
      s.about = trim(raw.substr(static_cast<std::size_t>(toks[1].column - 1)));
    } else if (kw == "seed" || kw == "samples" || kw == "steps" || kw == "q_grid" || kw == "width") {
      need(2);
      if (toks.size() > 2) throw ParseError("unexpected token", L, toks[2].column);
      if (kw == "seed") s.settings.seed = parse_number<std::uint64_t>(toks[1], L);
      if (kw == "samples") s.settings.samples = parse_number<std::size_t>(toks[1], L);
      if (kw == "steps") s.settings.steps = parse_number<int>(toks[1], L);
      if (kw == "q_grid") s.settings.q_grid = parse_number<std::size_t>(toks[1], L);
      if (kw == "width") s.settings.line_half_width = parse_number<double>(toks[1], L);
    } else if (kw == "tol") {
      need(3);
      if (toks.size() > 3) throw ParseError("unexpected token", L, toks[3].column);
      const double v = parse_number<double>(toks[2], L);
      auto& t = s.settings.tol;
      const std::string& k = toks[1].text;
      if (k == "sample") t.sample = v;
      else if (k == "fd") t.fd = v;
      else if (k == "rank") t.rank_rel = v;
      else if (k == "cond") t.max_condition = v;
      else if (k == "gram") t.gram = v;
      else throw ParseError("unknown tolerance '" + k + "'", L, toks[1].column);
    } else if (kw == "model") {
      need(4);
      claim(toks[1], L);
      if (toks[2].text != "=") throw ParseError("expected '='", L, toks[2].column);
      SceneModel m;
      m.name = toks[1].text;
      m.line = L;
      const bool names_model =
          std::any_of(s.models.begin(), s.models.end(), [&](auto& x) { return x.name == toks[3].text; });
      if (names_model && (toks.size() != 6 || toks[4].text != "x"))
        throw ParseError("expected <base> x <name>:circle", L, toks[3].column);
      if (names_model) {
        m.base = toks[3].text;
        const Coordinate c = parse_coordinate(toks[5], L);
        if (c.kind != CoordKind::Circle) throw ParseError("the extra factor must be a circle", L, toks[5].column);
        m.coords = {c};
        m.model = at_line(L, [&] { return ManifoldModel::with_circle(model_ref(toks[3], L), c.name); });
      } else {
        for (std::size_t i = 3; i < toks.size(); ++i) m.coords.push_back(parse_coordinate(toks[i], L));
        m.model = at_line(L, [&] { return ManifoldModel::make(m.coords); });
      }
      s.models.push_back(std::move(m));
    } else if (kw == "form" || kw == "function" || kw == "vector") {
      need(6);
      claim(toks[1], L);
      if (toks[2].text != "on") throw ParseError("expected 'on'", L, toks[2].column);
      if (toks[4].text != "=") throw ParseError("expected '='", L, toks[4].column);
      SceneObject o;
      o.name = toks[1].text;
      o.model = toks[3].text;
      o.line = L;
      const ModelPtr& M = model_ref(toks[3], L);
      const int off = toks[5].column - 1;
      const std::string expr(raw.substr(static_cast<std::size_t>(off)));
      if (kw == "form") {
        o.kind = ObjectKind::Form;
        o.form = at_line(L, [&] { return parse_form(M, expr, -1, &s.symbols_, L, off); });
        s.symbols_.forms.insert_or_assign(o.name, *o.form);
      } else if (kw == "function") {
        o.kind = ObjectKind::Function;
        o.form = DifferentialForm(at_line(L, [&] { return parse_field(M, expr, &s.symbols_, L, off); }));
        s.symbols_.forms.insert_or_assign(o.name, *o.form);
      } else {
        o.kind = ObjectKind::Vector;
        o.vector = at_line(L, [&] { return parse_vector(M, expr, &s.symbols_, L, off); });
        s.symbols_.vectors.insert_or_assign(o.name, *o.vector);
      }
      s.objects.push_back(std::move(o));
    } else if (kw == "candidate") {
      need(4);
      claim(toks[1], L);
      if (toks[2].text != "on") throw ParseError("expected 'on'", L, toks[2].column);
      model_ref(toks[3], L);
      const auto kv = key_values(toks, 4, L);
      allow_keys(kv, {"omega", "F", "E", "G"}, L);
      SceneCandidate c;
      c.name = toks[1].text;
      c.model = toks[3].text;
      c.line = L;
      c.omega = require_key(kv, "omega", L, toks[1].column).text;
      c.F = require_key(kv, "F", L, toks[1].column).text;
      c.E = split_list(require_key(kv, "E", L, toks[1].column).text);
      c.G = split_list(require_key(kv, "G", L, toks[1].column).text);
      s.candidates.push_back(c);
      at_line(L, [&] { return s.candidate(c.name); });
    } else if (kw == "deformation") {
      need(2);
      claim(toks[1], L);
      const auto kv = key_values(toks, 2, L);
      allow_keys(kv, {"omega", "f", "F"}, L);
      SceneDeformation d;
      d.name = toks[1].text;
      d.line = L;
      d.omega = require_key(kv, "omega", L, toks[1].column).text;
      d.f = require_key(kv, "f", L, toks[1].column).text;
      if (kv.count("F")) d.F = kv.at("F").text;
      s.deformations.push_back(d);
      at_line(L, [&] { return s.deformation(d.name); });
    } else if (kw == "pair") {
      need(2);
      claim(toks[1], L);
      const auto kv = key_values(toks, 2, L);
      allow_keys(kv, {"candidate", "rho", "B"}, L);
      ScenePair p;
      p.name = toks[1].text;
      p.line = L;
      p.candidate = require_key(kv, "candidate", L, toks[1].column).text;
      check_entity(p.candidate, 'c', L);
      p.rho = split_list(require_key(kv, "rho", L, toks[1].column).text);
      p.B = require_key(kv, "B", L, toks[1].column).text;
      s.pairs.push_back(p);
      at_line(L, [&] { return s.pair(p.name); });
    } else if (kw == "check") {
      need(2);
      const auto it = op_schemas().find(toks[1].text);
      if (it == op_schemas().end()) throw ParseError("unknown check '" + toks[1].text + "'", L, toks[1].column);
      SceneCheck c;
      c.op = toks[1].text;
      c.label = c.op;
      c.line = L;
      std::vector<std::string> order;
      const auto kv = key_values(toks, 2, L, &order);
      for (const auto& k : order) {
        const Token& v = kv.at(k);
        if (k == "name") {
          if (!is_identifier(v.text)) throw ParseError("bad check name", L, v.column);
          c.label = v.text;
        } else if (k == "expect") {
          if (v.text != "pass" && v.text != "fail") throw ParseError("expect must be pass or fail", L, v.column);
          c.expect_pass = v.text == "pass";
        } else {
          const auto& sch = it->second;
          if (std::find(sch.required.begin(), sch.required.end(), k) == sch.required.end() &&
              std::find(sch.optional.begin(), sch.optional.end(), k) == sch.optional.end())
            throw ParseError("unknown key '" + k + "' for " + c.op, L, v.column);
          c.args.emplace_back(k, v.text);
        }
      }
      for (const auto& r : it->second.required)
        if (!kv.count(r)) throw ParseError("missing " + r + "= for " + c.op, L, toks[1].column);
      for (const auto& [k, kind] : it->second.refs) check_entity(kv.at(k).text, kind, L);
      s.checks.push_back(std::move(c));
    } else {
      throw ParseError("unknown statement '" + kw + "'", L, toks[0].column);
    }
  }
  if (!have_name) throw ParseError("missing 'scene <name>' in " + source, 1, 1);
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError("cannot read " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.string());
}

std::string serialize(const Scene& s) {
  std::ostringstream o;
  o << "scene " << s.name << "\n";
  if (!s.about.empty()) o << "about " << s.about << "\n";
  const auto& t = s.settings;
  o << "seed " << t.seed << "\n"
    << "samples " << t.samples << "\n"
    << "width " << format_double(t.line_half_width) << "\n"
    << "steps " << t.steps << "\n"
    << "q_grid " << t.q_grid << "\n"
    << "tol sample " << format_double(t.tol.sample) << "\n"
    << "tol fd " << format_double(t.tol.fd) << "\n"
    << "tol rank " << format_double(t.tol.rank_rel) << "\n"
    << "tol cond " << format_double(t.tol.max_condition) << "\n"
    << "tol gram " << format_double(t.tol.gram) << "\n";
  if (!s.models.empty()) o << "\n";
  for (const auto& m : s.models) {
    o << "model " << m.name << " =";
    if (!m.base.empty()) o << " " << m.base << " x";
    for (const auto& c : m.coords) o << " " << c.name << ":" << kind_name(c.kind);
    o << "\n";
  }
  if (!s.objects.empty()) o << "\n";
  for (const auto& ob : s.objects) {
    const char* kw = ob.kind == ObjectKind::Form ? "form" : ob.kind == ObjectKind::Function ? "function" : "vector";
    o << kw << " " << ob.name << " on " << ob.model << " = " << ob.text() << "\n";
  }
  if (!s.candidates.empty() || !s.deformations.empty() || !s.pairs.empty()) o << "\n";
  for (const auto& c : s.candidates)
    o << "candidate " << c.name << " on " << c.model << " omega=" << c.omega << " F=" << c.F << " E=" << join(c.E)
      << " G=" << join(c.G) << "\n";
  for (const auto& d : s.deformations) {
    o << "deformation " << d.name << " omega=" << d.omega << " f=" << d.f;
    if (d.F) o << " F=" << *d.F;
    o << "\n";
  }
  for (const auto& p : s.pairs)
    o << "pair " << p.name << " candidate=" << p.candidate << " rho=" << join(p.rho) << " B=" << p.B << "\n";
  if (!s.checks.empty()) o << "\n";
  for (const auto& c : s.checks) {
    o << "check " << c.op;
    if (c.label != c.op) o << " name=" << c.label;
    if (!c.expect_pass) o << " expect=fail";
    for (const auto& [k, v] : c.args) o << " " << k << "=" << v;
    o << "\n";
  }
  return o.str();
}

std::vector<CatalogEntry> catalog(const std::filesystem::path& dir) {
  std::vector<CatalogEntry> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".scene") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    CatalogEntry row;
    row.file = f.filename().string();
    row.name = f.stem().string();
    try {
      const Scene s = load_scene(f);
      row.name = s.name;
      row.about = s.about;
    } catch (const std::exception& e) {
      row.valid = false;
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace branelab::scene
