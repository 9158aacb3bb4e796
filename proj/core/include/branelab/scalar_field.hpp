#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "branelab/model.hpp"

namespace branelab {

enum class Phase : std::uint8_t { Cos, Sin };

/// One basis element x^p * trig(2*pi*k.x).
///
/// `powers` may only be non-zero on circle coordinates inside the extended
/// class produced by circle antiderivatives; `freqs` is always zero on line
/// coordinates.
struct Monomial {
  std::vector<int> powers;
  std::vector<int> freqs;
  Phase phase = Phase::Cos;

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

  bool has_frequency() const;
};

/// Exact trigonometric-polynomial field on a product model.
///
/// Canonical form: no zero coefficients (pruned at the model's epsilon,
/// absolute and relative to the cancelling operands), no sin term with zero
/// frequency, and every frequency vector has its first non-zero entry
/// positive.
class ScalarField {
 public:
  using TermMap = std::map<Monomial, double>;

  explicit ScalarField(ModelPtr model);

  static ScalarField constant(ModelPtr model, double value);
  /// x_i. Only line coordinates; circle coordinates enter through trig terms.
  static ScalarField coordinate(ModelPtr model, std::size_t i, int power = 1);
  static ScalarField trig(ModelPtr model, std::vector<int> freqs, Phase phase, double coeff = 1.0);
  /// Canonicalizing constructor. Circle powers are accepted only when
  /// `allow_circle_powers` is set (extended class).
  static ScalarField from_terms(ModelPtr model, const std::vector<std::pair<Monomial, double>>& terms,
                                bool allow_circle_powers = false);

  const ModelPtr& model() const noexcept { return model_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  /// Value of a constant field; throws NonConstantForm otherwise.
  double constant_value() const;
  /// False when some term carries a power of a circle coordinate.
  bool is_periodic() const noexcept;
  bool depends_on(std::size_t i) const;
  int max_abs_frequency() const noexcept;
  double coefficient(const Monomial& m) const;
  double max_abs_coefficient() const noexcept;

  double eval(std::span<const double> point) const;

  ScalarField operator-() const;
  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

  /// Canonical-form equality: the difference prunes to zero.
  bool operator==(const ScalarField& other) const;

  ScalarField partial(std::size_t i) const;
  /// Mean over the circle coordinate i; result does not depend on x_i.
  ScalarField circle_average(std::size_t i) const;
  /// Integral from 0 to x_i along circle coordinate i. The result lives in
  /// the extended class (it may carry powers of x_i).
  ScalarField circle_antiderivative(std::size_t i) const;
  /// Substitutes x_i = value for value in {0, 1} on a circle coordinate.
  ScalarField substitute_circle_endpoint(std::size_t i, int value) const;

  /// Embedding into a chart of which this model is a leading prefix.
  ScalarField extend_to(const ModelPtr& larger) const;
  /// Embedding into a chart whose coordinates offset..offset+dim-1 match
  /// this model's coordinates.
  ScalarField embed(const ModelPtr& target, std::size_t offset) const;
  /// Restriction to a leading-prefix chart; the field must not depend on
  /// the dropped coordinates.
  ScalarField restrict_to(const ModelPtr& smaller) const;

  /// Canonical text, e.g. `1.5*x1^2*cos(2*pi*(q - x2))`.
  std::string to_string() const;

 private:
  ScalarField(ModelPtr model, TermMap terms) : model_(std::move(model)), terms_(std::move(terms)) {}

  ModelPtr model_;
  TermMap terms_;
};

ScalarField field_mul(const ScalarField& a, const ScalarField& b);
ScalarField partial(const ScalarField& a, std::size_t i);
ScalarField circle_average(const ScalarField& a, std::size_t q_index);
double eval(const ScalarField& a, std::span<const double> point);

/// Flattened evaluator for hot loops (flow right-hand sides).
class FieldEvaluator {
 public:
  FieldEvaluator() = default;
  explicit FieldEvaluator(const ScalarField& f);
  double operator()(const double* point) const;
  bool empty() const noexcept { return terms_.empty(); }

 private:
  struct Term {
    double coeff;
    bool sin;
    std::vector<std::pair<int, int>> powers;
    std::vector<std::pair<int, double>> freqs;  // index, 2*pi*k
  };
  std::vector<Term> terms_;
};

}  // namespace branelab
