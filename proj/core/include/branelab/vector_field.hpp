#pragma once

#include <span>
#include <string>
#include <vector>

#include "branelab/scalar_field.hpp"

namespace branelab {

/// Tangent vector field with one ScalarField component per coordinate.
class VectorField {
 public:
  explicit VectorField(ModelPtr model);
  VectorField(ModelPtr model, std::vector<ScalarField> components);

  /// The coordinate field d/dx_i.
  static VectorField basis(ModelPtr model, std::size_t i);

  const ModelPtr& model() const noexcept { return model_; }
  std::size_t dim() const noexcept { return comps_.size(); }
  const ScalarField& operator[](std::size_t i) const { return comps_.at(i); }
  const std::vector<ScalarField>& components() const noexcept { return comps_; }
  void set(std::size_t i, ScalarField f);

  bool is_zero() const noexcept;
  bool is_constant() const noexcept;

  VectorField operator-() const;
  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(const ScalarField& f, const VectorField& v);
  friend VectorField operator*(double s, const VectorField& v);
  bool operator==(const VectorField& o) const;

  /// Directional derivative X(f).
  ScalarField apply(const ScalarField& f) const;
  std::vector<double> eval(std::span<const double> point) const;

  VectorField extend_to(const ModelPtr& larger) const;
  /// Pushforward along the inclusion at coordinate offset (zero components
  /// elsewhere).
  VectorField embed(const ModelPtr& target, std::size_t offset) const;

  /// `a*d/dx1 + b*d/dq` in the scene grammar.
  std::string to_string() const;

 private:
  ModelPtr model_;
  std::vector<ScalarField> comps_;
};

/// [X, Y] = X(Y^i) - Y(X^i) per component.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

}  // namespace branelab
