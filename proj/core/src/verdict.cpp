#include "branelab/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace branelab {

const char* to_string(Mode m) noexcept { return m == Mode::Exact ? "EXACT" : "SAMPLED"; }

Condition& Verdict::add(Condition c) {
  pass = pass && c.pass;
  if (c.mode == Mode::Sampled) mode = Mode::Sampled;
  conditions.push_back(std::move(c));
  return conditions.back();
}

const Condition& Verdict::at(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw std::out_of_range("verdict '" + check + "' has no condition '" + name + "'");
}

bool Verdict::has(const std::string& name) const {
  return std::any_of(conditions.begin(), conditions.end(),
                     [&](const Condition& c) { return c.name == name; });
}

double Verdict::max_residual() const {
  double r = 0.0;
  for (const auto& c : conditions) r = std::max(r, c.residual);
  return r;
}

void SampleTracker::observe(const std::vector<double>& point, double residual, std::string note) {
  const bool bad = !(residual <= tol_);
  if (bad || !std::isfinite(residual)) {
    pass_ = false;
    if (failures_.size() < 3) failures_.push_back({point, residual, note});
  }
  if (!(residual <= worst_) || worst_w_.point.empty()) {
    if (!(residual <= worst_)) worst_ = residual;
    worst_w_ = {point, residual, std::move(note)};
  }
}

void SampleTracker::fail(const std::vector<double>& point, std::string note) {
  pass_ = false;
  if (failures_.size() < 3) failures_.push_back({point, INFINITY, std::move(note)});
  worst_ = INFINITY;
}

Condition SampleTracker::finish(Mode mode) const {
  Condition c;
  c.name = name_;
  c.pass = pass_;
  c.mode = mode;
  c.residual = worst_;
  if (!failures_.empty())
    c.witnesses = failures_;
  else if (!worst_w_.point.empty())
    c.witnesses.push_back(worst_w_);
  return c;
}

Condition exact_condition(std::string name, double residual, std::string detail) {
  Condition c;
  c.name = std::move(name);
  c.mode = Mode::Exact;
  c.residual = residual;
  c.pass = residual == 0.0;
  c.detail = std::move(detail);
  if (!c.pass) c.witnesses.push_back({{}, residual, c.detail});
  return c;
}

}  // namespace branelab
