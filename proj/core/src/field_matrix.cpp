#include "branelab/field_matrix.hpp"

#include <algorithm>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

FieldMatrix::FieldMatrix(ModelPtr model, std::size_t rows, std::size_t cols)
    : model_(std::move(model)), rows_(rows), cols_(cols) {
  if (!model_) throw ModelError("null model");
  data_.assign(rows * cols, ScalarField(model_));
}

FieldMatrix FieldMatrix::identity(ModelPtr model, std::size_t n) {
  FieldMatrix m(model, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = ScalarField::constant(model, 1.0);
  return m;
}

FieldMatrix FieldMatrix::constant(ModelPtr model, const Eigen::MatrixXd& v) {
  FieldMatrix m(model, v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) m(i, j) = ScalarField::constant(model, v(i, j));
  return m;
}

FieldMatrix FieldMatrix::from_columns(const std::vector<VectorField>& cols) {
  if (cols.empty()) throw DegreeError("from_columns needs at least one column");
  const auto& model = cols.front().model();
  FieldMatrix m(model, model->dim(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    require_same_model(model, cols[j].model(), "from_columns");
    for (std::size_t i = 0; i < model->dim(); ++i) m(i, j) = cols[j][i];
  }
  return m;
}

bool FieldMatrix::is_constant() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const auto& f) { return f.is_constant(); });
}

bool FieldMatrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const auto& f) { return f.is_zero(); });
}

Eigen::MatrixXd FieldMatrix::constant_value() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).constant_value();
  return m;
}

Eigen::MatrixXd FieldMatrix::eval(std::span<const double> point) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(point);
  return m;
}

FieldMatrix FieldMatrix::transpose() const {
  FieldMatrix t(model_, cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

FieldMatrix FieldMatrix::operator-() const {
  FieldMatrix r = *this;
  for (auto& f : r.data_) f = -f;
  return r;
}

FieldMatrix& FieldMatrix::operator+=(const FieldMatrix& o) {
  require_same_model(model_, o.model_, "matrix +");
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DegreeError("matrix shape mismatch in +");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

FieldMatrix& FieldMatrix::operator-=(const FieldMatrix& o) { return *this += -o; }

FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_model(a.model_, b.model_, "matrix *");
  if (a.cols_ != b.rows_) throw DegreeError("matrix shape mismatch in *");
  FieldMatrix r(a.model_, a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < b.cols_; ++j) {
      ScalarField s(a.model_);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const auto& x = a(i, k);
        const auto& y = b(k, j);
        if (!x.is_zero() && !y.is_zero()) s += x * y;
      }
      r(i, j) = std::move(s);
    }
  return r;
}

FieldMatrix operator*(double s, FieldMatrix a) {
  for (auto& f : a.data_) f *= s;
  return a;
}

bool FieldMatrix::operator==(const FieldMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  return (*this - o).is_zero();
}

VectorField FieldMatrix::column(std::size_t j) const {
  if (rows_ != model_->dim()) throw DegreeError("column: row count differs from model dimension");
  std::vector<ScalarField> c;
  for (std::size_t i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
  return VectorField(model_, std::move(c));
}

VectorField FieldMatrix::apply(const VectorField& v) const {
  require_same_model(model_, v.model(), "matrix apply");
  if (cols_ != v.dim() || rows_ != v.dim()) throw DegreeError("apply needs a square matrix");
  std::vector<ScalarField> c;
  for (std::size_t i = 0; i < rows_; ++i) {
    ScalarField s(model_);
    for (std::size_t k = 0; k < cols_; ++k)
      if (!(*this)(i, k).is_zero() && !v[k].is_zero()) s += (*this)(i, k) * v[k];
    c.push_back(std::move(s));
  }
  return VectorField(model_, std::move(c));
}

FieldMatrix FieldMatrix::inverse_constant(double max_condition) const {
  if (rows_ != cols_) throw DegreeError("inverse of a non-square matrix");
  if (!is_constant()) throw NonConstantForm("matrix inverse needs constant coefficients");
  const Eigen::MatrixXd m = constant_value();
  const double cond = condition_number(m);
  if (!(cond <= max_condition))
    throw DegenerateForm("singular matrix (condition " + std::to_string(cond) + ")", cond);
  return FieldMatrix::constant(model_, m.inverse());
}

double FieldMatrix::max_abs_coefficient() const noexcept {
  double v = 0.0;
  for (const auto& f : data_) v = std::max(v, f.max_abs_coefficient());
  return v;
}

std::string FieldMatrix::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < rows_; ++i) {
    out += i ? ", [" : "[";
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) out += ", ";
      out += (*this)(i, j).to_string();
    }
    out += "]";
  }
  return out + "]";
}

}  // namespace branelab
