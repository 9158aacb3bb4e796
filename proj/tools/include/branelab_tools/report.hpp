#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "branelab/sampling.hpp"
#include "branelab/verdict.hpp"

namespace branelab::report {

using Json = nlohmann::ordered_json;

enum class Format { Json, Csv, Text };
Format parse_format(const std::string& s);

struct CheckRecord {
  std::size_t index = 0;
  std::string name, op;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> args;
  Mode mode = Mode::Exact;
  bool verdict_pass = false;  // raw outcome of the check
  bool expect_pass = true;
  bool pass = false;          // outcome matches the expectation
  std::vector<Condition> conditions;
  Json data = Json::object();
  std::string error;  // exception text when the check raised
  double wall_time = 0.0;

  double max_residual() const;
};

struct Report {
  std::string scene, source, about;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  Tolerances tol;
  int steps = 0;
  std::size_t q_grid = 0;
  std::vector<CheckRecord> records;

  bool pass() const;
  std::size_t passed() const;

  Json to_json(bool wall_time = true) const;
  void write(std::ostream& out, Format f) const;
};

Json to_json(const Condition& c);
Json to_json(const Verdict& v);

}  // namespace branelab::report
