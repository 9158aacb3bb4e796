#pragma once

#include <string>
#include <vector>

namespace branelab {

enum class Mode { Exact, Sampled };

const char* to_string(Mode m) noexcept;

/// A point with the residual observed there. Exact witnesses carry no point.
struct Witness {
  std::vector<double> point;
  double residual = 0.0;
  std::string note;
};

/// One named sub-check of a verdict.
struct Condition {
  std::string name;
  bool pass = true;
  Mode mode = Mode::Exact;
  double residual = 0.0;
  std::vector<Witness> witnesses;
  std::string detail;
};

/// Structured result: overall pass is the conjunction of all conditions;
/// the mode is SAMPLED as soon as any condition is sampled.
struct Verdict {
  std::string check;
  bool pass = true;
  Mode mode = Mode::Exact;
  std::vector<Condition> conditions;
  std::string detail;

  Verdict() = default;
  explicit Verdict(std::string name) : check(std::move(name)) {}

  Condition& add(Condition c);
  /// Throws std::out_of_range for an unknown name.
  const Condition& at(const std::string& name) const;
  bool has(const std::string& name) const;
  bool passed(const std::string& name) const { return at(name).pass; }
  double max_residual() const;
};

/// Tracks the worst residual and the first failure while scanning samples.
class SampleTracker {
 public:
  SampleTracker(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}
  void observe(const std::vector<double>& point, double residual, std::string note = {});
  void fail(const std::vector<double>& point, std::string note);
  Condition finish(Mode mode = Mode::Sampled) const;

 private:
  std::string name_;
  double tol_;
  double worst_ = 0.0;
  bool pass_ = true;
  Witness worst_w_;
  std::vector<Witness> failures_;
};

/// Exact condition from a residual that must be exactly zero.
Condition exact_condition(std::string name, double residual, std::string detail = {});

}  // namespace branelab
