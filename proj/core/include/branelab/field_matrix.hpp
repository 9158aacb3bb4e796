#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "branelab/scalar_field.hpp"
#include "branelab/vector_field.hpp"

namespace branelab {

/// Dense matrix of ScalarField entries. Supports the same algebra as a
/// numeric Eigen matrix so checkers can be written once for both.
class FieldMatrix {
 public:
  FieldMatrix(ModelPtr model, std::size_t rows, std::size_t cols);
  static FieldMatrix identity(ModelPtr model, std::size_t n);
  /// Constant matrix from numbers.
  static FieldMatrix constant(ModelPtr model, const Eigen::MatrixXd& m);
  /// Columns are the given vector fields.
  static FieldMatrix from_columns(const std::vector<VectorField>& cols);

  const ModelPtr& model() const noexcept { return model_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const ScalarField& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  ScalarField& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  bool is_constant() const noexcept;
  bool is_zero() const noexcept;
  /// Numeric values; throws NonConstantForm unless is_constant().
  Eigen::MatrixXd constant_value() const;
  Eigen::MatrixXd eval(std::span<const double> point) const;

  FieldMatrix transpose() const;
  FieldMatrix operator-() const;
  FieldMatrix& operator+=(const FieldMatrix& o);
  FieldMatrix& operator-=(const FieldMatrix& o);
  friend FieldMatrix operator+(FieldMatrix a, const FieldMatrix& b) { return a += b; }
  friend FieldMatrix operator-(FieldMatrix a, const FieldMatrix& b) { return a -= b; }
  friend FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b);
  friend FieldMatrix operator*(double s, FieldMatrix a);
  bool operator==(const FieldMatrix& o) const;

  VectorField column(std::size_t j) const;
  VectorField apply(const VectorField& v) const;

  /// Inverse of a constant matrix. Throws NonConstantForm, or DegenerateForm
  /// when the condition number exceeds `max_condition`.
  FieldMatrix inverse_constant(double max_condition = 1e8) const;

  /// Largest absolute coefficient over all entries (0 for the zero matrix).
  double max_abs_coefficient() const noexcept;

  std::string to_string() const;

 private:
  ModelPtr model_;
  std::size_t rows_, cols_;
  std::vector<ScalarField> data_;
};

/// Endomorphism field acting on tangent vectors in the coordinate frame.
using EndoField = FieldMatrix;

inline FieldMatrix tr(const FieldMatrix& m) { return m.transpose(); }
inline Eigen::MatrixXd tr(const Eigen::MatrixXd& m) { return m.transpose(); }

/// Scalar residual of a matrix expression: exact (0 or the largest leftover
/// coefficient) for FieldMatrix, max-abs for numeric matrices.
inline double residual_of(const FieldMatrix& m) { return m.max_abs_coefficient(); }
inline double residual_of(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace branelab
