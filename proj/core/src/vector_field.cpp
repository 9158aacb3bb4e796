#include "branelab/vector_field.hpp"

#include <algorithm>

#include "branelab/errors.hpp"

namespace branelab {

VectorField::VectorField(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw ModelError("null model");
  comps_.assign(model_->dim(), ScalarField(model_));
}

VectorField::VectorField(ModelPtr model, std::vector<ScalarField> components)
    : model_(std::move(model)), comps_(std::move(components)) {
  if (!model_) throw ModelError("null model");
  if (comps_.size() != model_->dim())
    throw ModelError("vector field needs " + std::to_string(model_->dim()) + " components, got " +
                     std::to_string(comps_.size()));
  for (const auto& c : comps_) require_same_model(model_, c.model(), "vector field");
}

VectorField VectorField::basis(ModelPtr model, std::size_t i) {
  VectorField v(model);
  (void)model->coord(i);
  v.comps_[i] = ScalarField::constant(model, 1.0);
  return v;
}

void VectorField::set(std::size_t i, ScalarField f) {
  require_same_model(model_, f.model(), "vector field set");
  comps_.at(i) = std::move(f);
}

bool VectorField::is_zero() const noexcept {
  return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c.is_zero(); });
}

bool VectorField::is_constant() const noexcept {
  return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c.is_constant(); });
}

VectorField VectorField::operator-() const {
  VectorField r = *this;
  for (auto& c : r.comps_) c = -c;
  return r;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_model(model_, o.model_, "vector +");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) { return *this += -o; }

VectorField operator*(const ScalarField& f, const VectorField& v) {
  require_same_model(f.model(), v.model_, "scalar * vector");
  VectorField r = v;
  for (auto& c : r.comps_) c = f * c;
  return r;
}

VectorField operator*(double s, const VectorField& v) {
  VectorField r = v;
  for (auto& c : r.comps_) c *= s;
  return r;
}

bool VectorField::operator==(const VectorField& o) const { return (*this - o).is_zero(); }

ScalarField VectorField::apply(const ScalarField& f) const {
  require_same_model(model_, f.model(), "X(f)");
  ScalarField r(model_);
  for (std::size_t i = 0; i < comps_.size(); ++i)
    if (!comps_[i].is_zero()) r += comps_[i] * f.partial(i);
  return r;
}

std::vector<double> VectorField::eval(std::span<const double> point) const {
  std::vector<double> out(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i].eval(point);
  return out;
}

VectorField VectorField::extend_to(const ModelPtr& larger) const {
  if (!model_->is_prefix_of(*larger)) throw ModelMismatch("extend_to: model is not a leading prefix");
  return embed(larger, 0);
}

VectorField VectorField::embed(const ModelPtr& target, std::size_t offset) const {
  std::vector<ScalarField> c(target->dim(), ScalarField(target));
  for (std::size_t i = 0; i < comps_.size(); ++i) c.at(offset + i) = comps_[i].embed(target, offset);
  return VectorField(target, std::move(c));
}

std::string VectorField::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (comps_[i].is_zero()) continue;
    if (!out.empty()) out += " + ";
    const std::string basis = "d/d" + model_->coord(i).name;
    if (comps_[i] == ScalarField::constant(model_, 1.0))
      out += basis;
    else
      out += "(" + comps_[i].to_string() + ")*" + basis;
  }
  return out.empty() ? "0" : out;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_model(x.model(), y.model(), "lie_bracket");
  std::vector<ScalarField> c;
  c.reserve(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) c.push_back(x.apply(y[i]) - y.apply(x[i]));
  return VectorField(x.model(), std::move(c));
}

}  // namespace branelab
