#include "branelab/form.hpp"

#include <algorithm>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

namespace {

// Sorts indices in place; returns the permutation sign, or 0 on a repeat.
int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

std::string term_text(const ScalarField& c, const std::string& basis, bool first) {
  std::string s = c.to_string();
  const bool single = c.size() == 1;
  std::string out;
  if (single) {
    bool neg = !s.empty() && s[0] == '-';
    if (neg) s.erase(0, 1);
    out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
    if (s == "1")
      out += basis;
    else
      out += s + "*" + basis;
  } else {
    out += first ? "" : " + ";
    out += "(" + s + ")*" + basis;
  }
  return out;
}

}  // namespace

DifferentialForm::DifferentialForm(ModelPtr model, int degree) : model_(std::move(model)), degree_(degree) {
  if (!model_) throw ModelError("null model");
  if (degree < 0 || static_cast<std::size_t>(degree) > model_->dim())
    throw DegreeError("form degree " + std::to_string(degree) + " out of range for dimension " +
                      std::to_string(model_->dim()));
}

DifferentialForm::DifferentialForm(const ScalarField& f) : DifferentialForm(f.model(), 0) {
  if (!f.is_zero()) coeffs_.emplace(MultiIndex{}, f);
}

DifferentialForm DifferentialForm::monomial(const ScalarField& coeff, const std::vector<int>& indices) {
  DifferentialForm r(coeff.model(), static_cast<int>(indices.size()));
  for (int i : indices) (void)coeff.model()->coord(static_cast<std::size_t>(i));
  std::vector<int> idx = indices;
  const int sign = sort_with_sign(idx);
  if (sign != 0) r.add_term(idx, sign > 0 ? coeff : -coeff);
  return r;
}

DifferentialForm DifferentialForm::dx(ModelPtr model, std::size_t i) {
  return monomial(ScalarField::constant(model, 1.0), {static_cast<int>(i)});
}

DifferentialForm DifferentialForm::from_matrix(const FieldMatrix& w) {
  const auto& model = w.model();
  const std::size_t n = model->dim();
  if (w.rows() != n || w.cols() != n) throw DegreeError("2-form matrix must be dim x dim");
  DifferentialForm r(model, 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (!w(i, i).is_zero()) throw DegreeError("2-form matrix has a non-zero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(w(i, j) + w(j, i)).is_zero()) throw DegreeError("2-form matrix is not skew");
      r.add_term({static_cast<int>(i), static_cast<int>(j)}, w(i, j));
    }
  }
  return r;
}

DifferentialForm DifferentialForm::from_components(const std::vector<ScalarField>& xi) {
  if (xi.empty()) throw DegreeError("empty 1-form");
  const auto& model = xi.front().model();
  if (xi.size() != model->dim()) throw DegreeError("1-form needs one component per coordinate");
  DifferentialForm r(model, 1);
  for (std::size_t i = 0; i < xi.size(); ++i) r.add_term({static_cast<int>(i)}, xi[i]);
  return r;
}

ScalarField DifferentialForm::coefficient(const MultiIndex& idx) const {
  auto it = coeffs_.find(idx);
  return it == coeffs_.end() ? ScalarField(model_) : it->second;
}

void DifferentialForm::add_term(const MultiIndex& increasing, const ScalarField& f) {
  require_same_model(model_, f.model(), "form term");
  if (increasing.size() != static_cast<std::size_t>(degree_))
    throw DegreeError("term has wrong degree");
  for (std::size_t i = 0; i < increasing.size(); ++i) {
    (void)model_->coord(static_cast<std::size_t>(increasing[i]));
    if (i && increasing[i] <= increasing[i - 1]) throw DegreeError("multi-index not increasing");
  }
  if (f.is_zero()) return;
  auto it = coeffs_.find(increasing);
  if (it == coeffs_.end()) {
    coeffs_.emplace(increasing, f);
    return;
  }
  it->second += f;
  if (it->second.is_zero()) coeffs_.erase(it);
}

bool DifferentialForm::is_constant() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const auto& kv) { return kv.second.is_constant(); });
}

double DifferentialForm::max_abs_coefficient() const noexcept {
  double v = 0.0;
  for (const auto& [k, c] : coeffs_) v = std::max(v, c.max_abs_coefficient());
  return v;
}

ScalarField DifferentialForm::scalar() const {
  if (degree_ != 0) throw DegreeError("scalar() needs a 0-form");
  return coeffs_.empty() ? ScalarField(model_) : coeffs_.begin()->second;
}

std::vector<ScalarField> DifferentialForm::components() const {
  if (degree_ != 1) throw DegreeError("components() needs a 1-form");
  std::vector<ScalarField> out(model_->dim(), ScalarField(model_));
  for (const auto& [k, c] : coeffs_) out[k[0]] = c;
  return out;
}

FieldMatrix DifferentialForm::matrix() const {
  if (degree_ != 2) throw DegreeError("matrix() needs a 2-form");
  FieldMatrix m(model_, model_->dim(), model_->dim());
  for (const auto& [k, c] : coeffs_) {
    m(k[0], k[1]) = c;
    m(k[1], k[0]) = -c;
  }
  return m;
}

Eigen::MatrixXd DifferentialForm::matrix_at(std::span<const double> point) const {
  if (degree_ != 2) throw DegreeError("matrix_at() needs a 2-form");
  const auto n = static_cast<Eigen::Index>(model_->dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [k, c] : coeffs_) {
    const double v = c.eval(point);
    m(k[0], k[1]) = v;
    m(k[1], k[0]) = -v;
  }
  return m;
}

Eigen::VectorXd DifferentialForm::vector_at(std::span<const double> point) const {
  if (degree_ != 1) throw DegreeError("vector_at() needs a 1-form");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_->dim()));
  for (const auto& [k, c] : coeffs_) v(k[0]) = c.eval(point);
  return v;
}

double DifferentialForm::eval_on(std::span<const double> point,
                                 const std::vector<Eigen::VectorXd>& vectors) const {
  if (vectors.size() != static_cast<std::size_t>(degree_)) throw DegreeError("eval_on: wrong number of vectors");
  double sum = 0.0;
  const int k = degree_;
  for (const auto& [idx, c] : coeffs_) {
    Eigen::MatrixXd m(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) m(a, b) = vectors[b](idx[a]);
    sum += c.eval(point) * (k == 0 ? 1.0 : m.determinant());
  }
  return sum;
}

DifferentialForm DifferentialForm::operator-() const {
  DifferentialForm r = *this;
  for (auto& [k, c] : r.coeffs_) c = -c;
  return r;
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& o) {
  require_same_model(model_, o.model_, "form +");
  if (o.is_zero()) return *this;
  if (is_zero() && degree_ != o.degree_) degree_ = o.degree_;
  if (degree_ != o.degree_) throw DegreeError("cannot add forms of degrees " + std::to_string(degree_) +
                                              " and " + std::to_string(o.degree_));
  for (const auto& [k, c] : o.coeffs_) add_term(k, c);
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& o) { return *this += -o; }

DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a) {
  require_same_model(f.model(), a.model_, "scalar * form");
  DifferentialForm r(a.model_, a.degree_);
  for (const auto& [k, c] : a.coeffs_) r.add_term(k, f * c);
  return r;
}

DifferentialForm operator*(double s, const DifferentialForm& a) {
  DifferentialForm r(a.model_, a.degree_);
  for (const auto& [k, c] : a.coeffs_) r.add_term(k, s * c);
  return r;
}

bool DifferentialForm::operator==(const DifferentialForm& o) const {
  require_same_model(model_, o.model_, "form ==");
  if (degree_ != o.degree_) return is_zero() && o.is_zero();
  return (*this - o).is_zero();
}

DifferentialForm DifferentialForm::extend_to(const ModelPtr& larger) const {
  if (!model_->is_prefix_of(*larger)) throw ModelMismatch("extend_to: model is not a leading prefix");
  return embed(larger, 0);
}

DifferentialForm DifferentialForm::embed(const ModelPtr& target, std::size_t offset) const {
  DifferentialForm r(target, degree_);
  for (const auto& [k, c] : coeffs_) {
    MultiIndex shifted = k;
    for (auto& i : shifted) i += static_cast<int>(offset);
    r.coeffs_.emplace(std::move(shifted), c.embed(target, offset));
  }
  return r;
}

DifferentialForm DifferentialForm::restrict_to(const ModelPtr& smaller) const {
  if (!smaller->is_prefix_of(*model_)) throw ModelMismatch("restrict_to: target is not a leading prefix");
  const int n = static_cast<int>(smaller->dim());
  DifferentialForm r(smaller, std::min<int>(degree_, n));
  if (degree_ > n) {
    if (!is_zero()) throw DegreeError("restrict_to: degree exceeds target dimension");
    return DifferentialForm(smaller, 0);
  }
  for (const auto& [k, c] : coeffs_) {
    if (std::any_of(k.begin(), k.end(), [n](int i) { return i >= n; })) continue;
    r.coeffs_.emplace(k, c.restrict_to(smaller));
  }
  return r;
}

DifferentialForm DifferentialForm::without_direction(std::size_t i) const {
  DifferentialForm r(model_, degree_);
  for (const auto& [k, c] : coeffs_)
    if (std::find(k.begin(), k.end(), static_cast<int>(i)) == k.end()) r.coeffs_.emplace(k, c);
  return r;
}

std::string DifferentialForm::to_string() const {
  if (coeffs_.empty()) return "0";
  if (degree_ == 0) return coeffs_.begin()->second.to_string();
  std::string out;
  bool first = true;
  for (const auto& [k, c] : coeffs_) {
    std::string basis;
    for (std::size_t a = 0; a < k.size(); ++a) {
      if (a) basis += "^";
      basis += "d" + model_->coord(k[a]).name;
    }
    out += term_text(c, basis, first);
    first = false;
  }
  return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_model(a.model(), b.model(), "wedge");
  const int deg = a.degree() + b.degree();
  if (static_cast<std::size_t>(deg) > a.model()->dim())
    throw DegreeError("wedge degree " + std::to_string(deg) + " exceeds dimension");
  DifferentialForm r(a.model(), deg);
  for (const auto& [ka, ca] : a.coeffs()) {
    for (const auto& [kb, cb] : b.coeffs()) {
      std::vector<int> idx = ka;
      idx.insert(idx.end(), kb.begin(), kb.end());
      const int sign = sort_with_sign(idx);
      if (sign == 0) continue;
      ScalarField c = ca * cb;
      r.add_term(idx, sign > 0 ? c : -c);
    }
  }
  return r;
}

DifferentialForm ext_d(const DifferentialForm& a) {
  const auto& model = a.model();
  if (static_cast<std::size_t>(a.degree()) >= model->dim())
    throw DegreeError("ext_d of a top-degree form");
  DifferentialForm r(model, a.degree() + 1);
  for (const auto& [k, c] : a.coeffs()) {
    for (std::size_t j = 0; j < model->dim(); ++j) {
      if (std::find(k.begin(), k.end(), static_cast<int>(j)) != k.end()) continue;
      if (!c.depends_on(j)) continue;
      std::vector<int> idx{static_cast<int>(j)};
      idx.insert(idx.end(), k.begin(), k.end());
      const int sign = sort_with_sign(idx);
      ScalarField dc = c.partial(j);
      r.add_term(idx, sign > 0 ? dc : -dc);
    }
  }
  return r;
}

bool is_closed(const DifferentialForm& a) {
  if (static_cast<std::size_t>(a.degree()) >= a.model()->dim()) return true;
  return ext_d(a).is_zero();
}

DifferentialForm interior(const VectorField& x, const DifferentialForm& a) {
  require_same_model(x.model(), a.model(), "interior");
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  DifferentialForm r(a.model(), a.degree() - 1);
  for (const auto& [k, c] : a.coeffs()) {
    for (std::size_t m = 0; m < k.size(); ++m) {
      const auto& xm = x[k[m]];
      if (xm.is_zero()) continue;
      MultiIndex rest = k;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(m));
      ScalarField v = xm * c;
      r.add_term(rest, m % 2 == 0 ? v : -v);
    }
  }
  return r;
}

DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a) {
  require_same_model(x.model(), a.model(), "lie_derivative");
  if (a.degree() == 0) return DifferentialForm(x.apply(a.scalar()));
  DifferentialForm r = ext_d(interior(x, a));
  if (static_cast<std::size_t>(a.degree()) < a.model()->dim()) r += interior(x, ext_d(a));
  return r;
}

ScalarField apply_form(const DifferentialForm& a, const std::vector<VectorField>& vectors) {
  if (vectors.size() != static_cast<std::size_t>(a.degree()))
    throw DegreeError("apply_form: need " + std::to_string(a.degree()) + " vectors");
  DifferentialForm cur = a;
  for (const auto& v : vectors) cur = interior(v, cur);
  return cur.scalar();
}

namespace {

Eigen::MatrixXd constant_matrix(const DifferentialForm& omega, double max_condition, const char* what) {
  if (omega.degree() != 2) throw DegreeError(std::string(what) + ": omega must be a 2-form");
  const FieldMatrix w = omega.matrix();
  if (!w.is_constant())
    throw NonConstantForm(std::string(what) + ": exact mode needs constant omega; use the pointwise variant");
  const Eigen::MatrixXd m = w.constant_value();
  const double cond = condition_number(m);
  if (!(cond <= max_condition))
    throw DegenerateForm(std::string(what) + ": omega is degenerate (condition " + std::to_string(cond) + ")",
                         cond);
  return m;
}

}  // namespace

VectorField sharp(const DifferentialForm& omega, const DifferentialForm& xi, double max_condition) {
  require_same_model(omega.model(), xi.model(), "sharp");
  if (xi.degree() != 1) throw DegreeError("sharp: xi must be a 1-form");
  const Eigen::MatrixXd m = constant_matrix(omega, max_condition, "sharp");
  // interior(X, omega)_j = sum_i X^i W_ij, so X = W^-T xi.
  const Eigen::MatrixXd inv = m.transpose().inverse();
  const auto comps = xi.components();
  const auto& model = omega.model();
  std::vector<ScalarField> out(model->dim(), ScalarField(model));
  for (std::size_t i = 0; i < model->dim(); ++i)
    for (std::size_t j = 0; j < model->dim(); ++j)
      if (inv(i, j) != 0.0 && !comps[j].is_zero()) out[i] += inv(i, j) * comps[j];
  return VectorField(model, std::move(out));
}

Eigen::VectorXd sharp_at(const DifferentialForm& omega, const DifferentialForm& xi,
                         std::span<const double> point, double max_condition) {
  require_same_model(omega.model(), xi.model(), "sharp_at");
  const Eigen::MatrixXd m = omega.matrix_at(point);
  const double cond = condition_number(m);
  if (!(cond <= max_condition))
    throw DegenerateForm("sharp_at: omega is degenerate (condition " + std::to_string(cond) + ")", cond);
  return m.transpose().partialPivLu().solve(xi.vector_at(point));
}

EndoField endo_from_pair(const DifferentialForm& omega, const DifferentialForm& F, double max_condition) {
  require_same_model(omega.model(), F.model(), "endo_from_pair");
  const Eigen::MatrixXd m = constant_matrix(omega, max_condition, "endo_from_pair");
  if (F.degree() != 2) throw DegreeError("endo_from_pair: F must be a 2-form");
  return FieldMatrix::constant(omega.model(), m.inverse()) * F.matrix();
}

Eigen::MatrixXd endo_at(const DifferentialForm& omega, const DifferentialForm& F,
                        std::span<const double> point, double max_condition) {
  const Eigen::MatrixXd m = omega.matrix_at(point);
  const double cond = condition_number(m);
  if (!(cond <= max_condition))
    throw DegenerateForm("endo_at: omega is degenerate (condition " + std::to_string(cond) + ")", cond);
  return m.partialPivLu().solve(F.matrix_at(point));
}

DifferentialForm two_form_from(const DifferentialForm& omega, const EndoField& I) {
  require_same_model(omega.model(), I.model(), "two_form_from");
  // omega(I v, w) = v^T I^T W w.
  return DifferentialForm::from_matrix(I.transpose() * omega.matrix());
}

DifferentialForm endo_dual(const EndoField& I, const DifferentialForm& xi) {
  require_same_model(I.model(), xi.model(), "endo_dual");
  if (xi.degree() != 1) throw DegreeError("endo_dual: xi must be a 1-form");
  const auto comps = xi.components();
  const auto& model = xi.model();
  std::vector<ScalarField> out(model->dim(), ScalarField(model));
  for (std::size_t k = 0; k < model->dim(); ++k)
    for (std::size_t j = 0; j < model->dim(); ++j)
      if (!I(j, k).is_zero() && !comps[j].is_zero()) out[k] += I(j, k) * comps[j];
  return DifferentialForm::from_components(out);
}

FieldMatrix type11_defect(const DifferentialForm& B, const EndoField& I) {
  require_same_model(B.model(), I.model(), "type11_defect");
  const FieldMatrix b = B.matrix();
  return I.transpose() * b * I - b;
}

Verdict is_type_11(const DifferentialForm& B, const EndoField& I) {
  Verdict v("type11");
  v.add(exact_condition("type11", type11_defect(B, I).max_abs_coefficient()));
  return v;
}

}  // namespace branelab
