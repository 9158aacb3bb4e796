#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "branelab/field_matrix.hpp"
#include "branelab/scalar_field.hpp"
#include "branelab/vector_field.hpp"
#include "branelab/verdict.hpp"

namespace branelab {

/// Strictly increasing coordinate indices.
using MultiIndex = std::vector<int>;

/// Degree-k form with ScalarField coefficients on increasing multi-indices.
class DifferentialForm {
 public:
  using CoeffMap = std::map<MultiIndex, ScalarField>;

  DifferentialForm(ModelPtr model, int degree);
  /// Degree-0 form.
  explicit DifferentialForm(const ScalarField& f);

  /// coeff * dx_{i1} ^ ... ^ dx_{ik} for an arbitrary index order (sign by
  /// permutation parity, zero on repeats).
  static DifferentialForm monomial(const ScalarField& coeff, const std::vector<int>& indices);
  static DifferentialForm dx(ModelPtr model, std::size_t i);
  /// sum_{i<j} W_ij dx_i ^ dx_j; W must be skew (exactly).
  static DifferentialForm from_matrix(const FieldMatrix& w);
  /// sum_i xi_i dx_i.
  static DifferentialForm from_components(const std::vector<ScalarField>& xi);

  const ModelPtr& model() const noexcept { return model_; }
  int degree() const noexcept { return degree_; }
  const CoeffMap& coeffs() const noexcept { return coeffs_; }
  ScalarField coefficient(const MultiIndex& idx) const;
  void add_term(const MultiIndex& increasing, const ScalarField& f);

  bool is_zero() const noexcept { return coeffs_.empty(); }
  bool is_constant() const noexcept;
  double max_abs_coefficient() const noexcept;
  /// Degree-0 value.
  ScalarField scalar() const;
  /// Components of a 1-form.
  std::vector<ScalarField> components() const;

  /// Skew coefficient matrix W_ij = form(d_i, d_j) of a 2-form.
  FieldMatrix matrix() const;
  Eigen::MatrixXd matrix_at(std::span<const double> point) const;
  Eigen::VectorXd vector_at(std::span<const double> point) const;
  /// Value on numeric tangent vectors at a point.
  double eval_on(std::span<const double> point, const std::vector<Eigen::VectorXd>& vectors) const;

  DifferentialForm operator-() const;
  DifferentialForm& operator+=(const DifferentialForm& o);
  DifferentialForm& operator-=(const DifferentialForm& o);
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a);
  friend DifferentialForm operator*(double s, const DifferentialForm& a);
  bool operator==(const DifferentialForm& o) const;

  /// Pullback along the projection larger -> this chart (prefix embedding).
  DifferentialForm extend_to(const ModelPtr& larger) const;
  /// Pullback along the projection onto the coordinates offset..offset+dim-1.
  DifferentialForm embed(const ModelPtr& target, std::size_t offset) const;
  /// Pullback to a leading-prefix chart; coefficients must not depend on
  /// dropped coordinates.
  DifferentialForm restrict_to(const ModelPtr& smaller) const;
  /// Drops every term containing dx_i (pullback to a slice x_i = const,
  /// coefficients kept as functions of x_i).
  DifferentialForm without_direction(std::size_t i) const;

  /// `c*dx1^dy2 + (x1 + 1)*dq` in the scene grammar.
  std::string to_string() const;

 private:
  ModelPtr model_;
  int degree_;
  CoeffMap coeffs_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
/// Throws DegreeError when deg(a) equals the dimension.
DifferentialForm ext_d(const DifferentialForm& a);
bool is_closed(const DifferentialForm& a);
DifferentialForm interior(const VectorField& x, const DifferentialForm& a);
DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a);
/// Evaluates a k-form on k vector fields exactly.
ScalarField apply_form(const DifferentialForm& a, const std::vector<VectorField>& vectors);

/// X with interior(X, omega) = xi. Exact; needs constant omega.
VectorField sharp(const DifferentialForm& omega, const DifferentialForm& xi, double max_condition = 1e8);
/// Pointwise sharp; throws DegenerateForm above max_condition.
Eigen::VectorXd sharp_at(const DifferentialForm& omega, const DifferentialForm& xi,
                         std::span<const double> point, double max_condition = 1e8);

/// I = omega^-1 o F, i.e. omega(I v, w) = F(v, w). Exact; needs constant omega.
EndoField endo_from_pair(const DifferentialForm& omega, const DifferentialForm& F,
                         double max_condition = 1e8);
Eigen::MatrixXd endo_at(const DifferentialForm& omega, const DifferentialForm& F,
                        std::span<const double> point, double max_condition = 1e8);
/// F = omega o I. Throws DegreeError if the result is not skew.
DifferentialForm two_form_from(const DifferentialForm& omega, const EndoField& I);
/// (I* xi)(v) = xi(I v) for a 1-form xi.
DifferentialForm endo_dual(const EndoField& I, const DifferentialForm& xi);

/// B(I., I.) - B as a matrix of fields; zero iff B is of type (1,1).
FieldMatrix type11_defect(const DifferentialForm& B, const EndoField& I);
/// B(I v, I w) = B(v, w) on all coordinate pairs, decided exactly.
Verdict is_type_11(const DifferentialForm& B, const EndoField& I);

}  // namespace branelab
