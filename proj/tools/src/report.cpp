#include "branelab_tools/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace branelab::report {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "text") return Format::Text;
  throw std::invalid_argument("unknown format '" + s + "'");
}

double CheckRecord::max_residual() const {
  double m = 0.0;
  for (const auto& c : conditions) m = std::max(m, c.residual);
  return m;
}

bool Report::pass() const {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

std::size_t Report::passed() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; }));
}

Json to_json(const Condition& c) {
  Json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["mode"] = to_string(c.mode);
  j["residual"] = number(c.residual);
  if (!c.detail.empty()) j["detail"] = c.detail;
  Json w = Json::array();
  for (const auto& x : c.witnesses) {
    Json e;
    e["point"] = x.point;
    e["residual"] = number(x.residual);
    if (!x.note.empty()) e["note"] = x.note;
    w.push_back(std::move(e));
  }
  j["witnesses"] = std::move(w);
  return j;
}

Json to_json(const Verdict& v) {
  Json j;
  j["check"] = v.check;
  j["mode"] = to_string(v.mode);
  j["pass"] = v.pass;
  if (!v.detail.empty()) j["detail"] = v.detail;
  Json conds = Json::array();
  for (const auto& c : v.conditions) conds.push_back(to_json(c));
  j["conditions"] = std::move(conds);
  return j;
}

Json Report::to_json(bool wall_time) const {
  Json j;
  j["scene"] = scene;
  j["source"] = source;
  if (!about.empty()) j["about"] = about;
  j["seed"] = seed;
  j["samples"] = samples;
  j["tolerances"] = {{"sample", tol.sample}, {"fd", tol.fd},    {"rank", tol.rank_rel},
                     {"cond", tol.max_condition}, {"gram", tol.gram}};
  j["steps"] = steps;
  j["q_grid"] = q_grid;
  Json checks = Json::array();
  for (const auto& r : records) {
    Json c;
    c["index"] = r.index;
    c["name"] = r.name;
    c["op"] = r.op;
    c["line"] = r.line;
    Json args = Json::object();
    for (const auto& [k, v] : r.args) args[k] = v;
    c["args"] = std::move(args);
    c["mode"] = branelab::to_string(r.mode);
    c["pass"] = r.pass;
    c["verdict"] = r.verdict_pass;
    c["expect"] = r.expect_pass ? "pass" : "fail";
    Json res = Json::object();
    for (const auto& cond : r.conditions) res[cond.name] = number(cond.residual);
    c["residuals"] = std::move(res);
    Json conds = Json::array();
    for (const auto& cond : r.conditions) conds.push_back(report::to_json(cond));
    c["conditions"] = std::move(conds);
    c["data"] = r.data;
    if (!r.error.empty()) c["error"] = r.error;
    if (wall_time) c["wall_time"] = r.wall_time;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  j["summary"] = {{"checks", records.size()}, {"passed", passed()}, {"failed", records.size() - passed()}, {"pass", pass()}};
  return j;
}

void Report::write(std::ostream& out, Format f) const {
  switch (f) {
    case Format::Json:
      out << to_json().dump(2) << "\n";
      break;
    case Format::Csv:
      out << "index,name,op,mode,pass,verdict,expect,max_residual,wall_time,error\n";
      out << std::setprecision(17);
      for (const auto& r : records)
        out << r.index << "," << csv_escape(r.name) << "," << r.op << "," << branelab::to_string(r.mode) << ","
            << (r.pass ? "true" : "false") << "," << (r.verdict_pass ? "true" : "false") << ","
            << (r.expect_pass ? "pass" : "fail") << "," << r.max_residual() << "," << r.wall_time << ","
            << csv_escape(r.error) << "\n";
      break;
    case Format::Text:
      out << "scene " << scene << " (seed " << seed << ", " << samples << " samples)\n";
      out << std::setprecision(3);
      for (const auto& r : records) {
        out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  " << branelab::to_string(r.mode)
            << "  max residual " << r.max_residual();
        if (!r.expect_pass) out << "  (expected to fail)";
        out << "\n";
        for (const auto& c : r.conditions) {
          out << "    " << (c.pass ? "ok   " : "FAIL ") << c.name << "  " << c.residual;
          if (!c.detail.empty()) out << "  " << c.detail;
          out << "\n";
        }
        for (const auto& [k, v] : r.data.items()) out << "    " << k << " = " << v.dump() << "\n";
        if (!r.error.empty()) out << "    error: " << r.error << "\n";
      }
      out << passed() << "/" << records.size() << " checks passed\n";
      break;
  }
}

}  // namespace branelab::report
