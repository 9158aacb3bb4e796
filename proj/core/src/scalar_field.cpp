#include "branelab/scalar_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "branelab/errors.hpp"

namespace branelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Collects contributions per monomial and prunes cancellations relative to
// the size of what cancelled.
class Accumulator {
 public:
  explicit Accumulator(double eps) : eps_(eps) {}

  void add(Monomial m, double c) {
    if (c == 0.0) return;
    normalize(m, c);
    if (c == 0.0) return;
    auto& slot = acc_[std::move(m)];
    slot.first += c;
    slot.second += std::abs(c);
  }

  ScalarField::TermMap finish() {
    ScalarField::TermMap out;
    for (auto& [m, v] : acc_) {
      const double tol = eps_ * std::max(1.0, v.second);
      if (std::abs(v.first) > tol) out.emplace_hint(out.end(), m, v.first);
    }
    return out;
  }

  static void normalize(Monomial& m, double& c) {
    auto it = std::find_if(m.freqs.begin(), m.freqs.end(), [](int k) { return k != 0; });
    if (it == m.freqs.end()) {
      if (m.phase == Phase::Sin) c = 0.0;
      return;
    }
    if (*it < 0) {
      for (auto& k : m.freqs) k = -k;
      if (m.phase == Phase::Sin) c = -c;
    }
  }

 private:
  double eps_;
  std::map<Monomial, std::pair<double, double>> acc_;
};

Monomial unit_monomial(std::size_t dim) {
  return Monomial{std::vector<int>(dim, 0), std::vector<int>(dim, 0), Phase::Cos};
}

void check_index(const ModelPtr& m, std::size_t i) { (void)m->coord(i); }

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

// Linear combination k.x printed with integer coefficients.
std::string frequency_text(const ManifoldModel& model, const std::vector<int>& k) {
  std::string s;
  bool first = true;
  int nonzero = 0;
  for (int v : k)
    if (v != 0) ++nonzero;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0) continue;
    int a = k[i];
    if (first) {
      if (a < 0) s += "-";
    } else {
      s += a < 0 ? " - " : " + ";
    }
    a = std::abs(a);
    if (a != 1) s += std::to_string(a) + "*";
    s += model.coord(i).name;
    first = false;
  }
  if (nonzero > 1 || (nonzero == 1 && s.find('*') != std::string::npos)) return "(" + s + ")";
  return s;
}

}  // namespace

bool Monomial::has_frequency() const {
  return std::any_of(freqs.begin(), freqs.end(), [](int k) { return k != 0; });
}

ScalarField::ScalarField(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw ModelError("null model");
}

ScalarField ScalarField::constant(ModelPtr model, double value) {
  ScalarField f(std::move(model));
  if (value != 0.0) f.terms_.emplace(unit_monomial(f.model_->dim()), value);
  return f;
}

ScalarField ScalarField::coordinate(ModelPtr model, std::size_t i, int power) {
  check_index(model, i);
  if (model->is_circle(i))
    throw ModelError("circle coordinate '" + model->coord(i).name +
                     "' may only appear inside cos/sin");
  if (power < 0) throw ModelError("negative power");
  ScalarField f(std::move(model));
  auto m = unit_monomial(f.model_->dim());
  m.powers[i] = power;
  f.terms_.emplace(std::move(m), 1.0);
  return f;
}

ScalarField ScalarField::trig(ModelPtr model, std::vector<int> freqs, Phase phase, double coeff) {
  if (freqs.size() != model->dim()) throw ModelError("frequency vector has wrong dimension");
  for (std::size_t i = 0; i < freqs.size(); ++i)
    if (freqs[i] != 0 && !model->is_circle(i))
      throw ModelError("frequency on line coordinate '" + model->coord(i).name + "'");
  Monomial m{std::vector<int>(model->dim(), 0), std::move(freqs), phase};
  return from_terms(std::move(model), {{std::move(m), coeff}});
}

ScalarField ScalarField::from_terms(ModelPtr model,
                                    const std::vector<std::pair<Monomial, double>>& terms,
                                    bool allow_circle_powers) {
  const std::size_t n = model->dim();
  Accumulator acc(model->prune_epsilon());
  for (const auto& [m, c] : terms) {
    if (m.powers.size() != n || m.freqs.size() != n)
      throw ModelError("monomial has wrong dimension");
    for (std::size_t i = 0; i < n; ++i) {
      if (m.powers[i] < 0) throw ModelError("negative power");
      if (model->is_circle(i)) {
        if (m.powers[i] != 0 && !allow_circle_powers)
          throw ModelError("power of circle coordinate '" + model->coord(i).name + "'");
      } else if (m.freqs[i] != 0) {
        throw ModelError("frequency on line coordinate '" + model->coord(i).name + "'");
      }
    }
    if (!std::isfinite(c)) throw ModelError("non-finite coefficient");
    acc.add(m, c);
  }
  return ScalarField(std::move(model), acc.finish());
}

bool ScalarField::is_constant() const noexcept {
  if (terms_.empty()) return true;
  if (terms_.size() != 1) return false;
  const auto& m = terms_.begin()->first;
  return !m.has_frequency() &&
         std::all_of(m.powers.begin(), m.powers.end(), [](int p) { return p == 0; });
}

double ScalarField::constant_value() const {
  if (!is_constant()) throw NonConstantForm("field is not constant: " + to_string());
  return terms_.empty() ? 0.0 : terms_.begin()->second;
}

bool ScalarField::is_periodic() const noexcept {
  for (const auto& [m, c] : terms_)
    for (std::size_t i = 0; i < m.powers.size(); ++i)
      if (m.powers[i] != 0 && model_->coords()[i].kind == CoordKind::Circle) return false;
  return true;
}

bool ScalarField::depends_on(std::size_t i) const {
  check_index(model_, i);
  for (const auto& [m, c] : terms_)
    if (m.powers[i] != 0 || m.freqs[i] != 0) return true;
  return false;
}

int ScalarField::max_abs_frequency() const noexcept {
  int k = 0;
  for (const auto& [m, c] : terms_)
    for (int v : m.freqs) k = std::max(k, std::abs(v));
  return k;
}

double ScalarField::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double ScalarField::max_abs_coefficient() const noexcept {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

double ScalarField::eval(std::span<const double> point) const {
  if (point.size() != model_->dim())
    throw ModelError("point has dimension " + std::to_string(point.size()) + ", model has " +
                     std::to_string(model_->dim()));
  std::vector<double> x(point.begin(), point.end());
  if (is_periodic()) x = model_->wrap(point);
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    double arg = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (m.powers[i] != 0) v *= std::pow(x[i], m.powers[i]);
      if (m.freqs[i] != 0) arg += m.freqs[i] * x[i];
    }
    if (m.has_frequency() || m.phase == Phase::Sin)
      v *= m.phase == Phase::Cos ? std::cos(kTwoPi * arg) : std::sin(kTwoPi * arg);
    sum += v;
  }
  return sum;
}

ScalarField ScalarField::operator-() const {
  ScalarField r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_model(model_, other.model_, "field +");
  Accumulator acc(model_->prune_epsilon());
  for (const auto& [m, c] : terms_) acc.add(m, c);
  for (const auto& [m, c] : other.terms_) acc.add(m, c);
  terms_ = acc.finish();
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) { return *this += -other; }

ScalarField& ScalarField::operator*=(double s) {
  if (!std::isfinite(s)) throw ModelError("non-finite scale");
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_model(a.model_, b.model_, "field *");
  const std::size_t n = a.model_->dim();
  Accumulator acc(a.model_->prune_epsilon());
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial base = unit_monomial(n);
      for (std::size_t i = 0; i < n; ++i) base.powers[i] = ma.powers[i] + mb.powers[i];
      const double c = ca * cb;
      if (!ma.has_frequency()) {
        base.freqs = mb.freqs;
        base.phase = mb.phase;
        acc.add(std::move(base), c);
        continue;
      }
      if (!mb.has_frequency()) {
        base.freqs = ma.freqs;
        base.phase = ma.phase;
        acc.add(std::move(base), c);
        continue;
      }
      Monomial sum = base, diff = base;
      for (std::size_t i = 0; i < n; ++i) {
        sum.freqs[i] = ma.freqs[i] + mb.freqs[i];
        diff.freqs[i] = ma.freqs[i] - mb.freqs[i];
      }
      const bool sa = ma.phase == Phase::Sin, sb = mb.phase == Phase::Sin;
      if (!sa && !sb) {
        // cos A cos B = (cos(A-B) + cos(A+B)) / 2
        diff.phase = sum.phase = Phase::Cos;
        acc.add(std::move(diff), 0.5 * c);
        acc.add(std::move(sum), 0.5 * c);
      } else if (sa && sb) {
        // sin A sin B = (cos(A-B) - cos(A+B)) / 2
        diff.phase = sum.phase = Phase::Cos;
        acc.add(std::move(diff), 0.5 * c);
        acc.add(std::move(sum), -0.5 * c);
      } else if (sa) {
        // sin A cos B = (sin(A+B) + sin(A-B)) / 2
        diff.phase = sum.phase = Phase::Sin;
        acc.add(std::move(diff), 0.5 * c);
        acc.add(std::move(sum), 0.5 * c);
      } else {
        // cos A sin B = (sin(A+B) - sin(A-B)) / 2
        diff.phase = sum.phase = Phase::Sin;
        acc.add(std::move(diff), -0.5 * c);
        acc.add(std::move(sum), 0.5 * c);
      }
    }
  }
  return ScalarField(a.model_, acc.finish());
}

bool ScalarField::operator==(const ScalarField& other) const {
  require_same_model(model_, other.model_, "field ==");
  return (*this - other).is_zero();
}

ScalarField ScalarField::partial(std::size_t i) const {
  check_index(model_, i);
  Accumulator acc(model_->prune_epsilon());
  for (const auto& [m, c] : terms_) {
    if (m.powers[i] != 0) {
      Monomial d = m;
      d.powers[i] -= 1;
      acc.add(std::move(d), c * m.powers[i]);
    }
    if (m.freqs[i] != 0) {
      Monomial d = m;
      const double a = kTwoPi * m.freqs[i];
      if (m.phase == Phase::Cos) {
        d.phase = Phase::Sin;
        acc.add(std::move(d), -a * c);
      } else {
        d.phase = Phase::Cos;
        acc.add(std::move(d), a * c);
      }
    }
  }
  return ScalarField(model_, acc.finish());
}

ScalarField ScalarField::circle_average(std::size_t i) const {
  check_index(model_, i);
  if (!model_->is_circle(i))
    throw ModelError("circle_average: '" + model_->coord(i).name + "' is not a circle coordinate");
  bool simple = true;
  for (const auto& [m, c] : terms_)
    if (m.powers[i] != 0) simple = false;
  if (!simple) return circle_antiderivative(i).substitute_circle_endpoint(i, 1);
  Accumulator acc(model_->prune_epsilon());
  for (const auto& [m, c] : terms_)
    if (m.freqs[i] == 0) acc.add(m, c);
  return ScalarField(model_, acc.finish());
}

ScalarField ScalarField::circle_antiderivative(std::size_t i) const {
  check_index(model_, i);
  if (!model_->is_circle(i))
    throw ModelError("circle_antiderivative: '" + model_->coord(i).name +
                     "' is not a circle coordinate");
  Accumulator acc(model_->prune_epsilon());
  for (const auto& [m, c] : terms_) {
    if (m.freqs[i] == 0) {
      Monomial r = m;
      r.powers[i] += 1;
      const double scale = 1.0 / r.powers[i];
      acc.add(std::move(r), c * scale);
      continue;
    }
    // Integration by parts: with a = 2*pi*k_i,
    //   int s^p cos = s^p sin / a - (p/a) int s^(p-1) sin
    //   int s^p sin = -s^p cos / a + (p/a) int s^(p-1) cos
    const double a = kTwoPi * m.freqs[i];
    Monomial cur = m;
    double coeff = c;
    while (true) {
      Monomial out = cur;
      const int p = cur.powers[i];
      if (cur.phase == Phase::Cos) {
        out.phase = Phase::Sin;
        acc.add(out, coeff / a);
        coeff = -coeff * p / a;
        cur.phase = Phase::Sin;
      } else {
        out.phase = Phase::Cos;
        acc.add(out, -coeff / a);
        coeff = coeff * p / a;
        cur.phase = Phase::Cos;
      }
      if (p == 0) break;
      cur.powers[i] -= 1;
    }
  }
  ScalarField indefinite(model_, acc.finish());
  return indefinite - indefinite.substitute_circle_endpoint(i, 0);
}

ScalarField ScalarField::substitute_circle_endpoint(std::size_t i, int value) const {
  check_index(model_, i);
  if (!model_->is_circle(i))
    throw ModelError("substitution needs a circle coordinate, got '" + model_->coord(i).name + "'");
  if (value != 0 && value != 1) throw ModelError("substitution value must be 0 or 1");
  Accumulator acc(model_->prune_epsilon());
  for (const auto& [m, c] : terms_) {
    if (value == 0 && m.powers[i] != 0) continue;
    Monomial r = m;
    r.powers[i] = 0;
    r.freqs[i] = 0;
    acc.add(std::move(r), c);
  }
  return ScalarField(model_, acc.finish());
}

ScalarField ScalarField::extend_to(const ModelPtr& larger) const {
  if (!model_->is_prefix_of(*larger))
    throw ModelMismatch("extend_to: model is not a leading prefix of the target");
  return embed(larger, 0);
}

ScalarField ScalarField::embed(const ModelPtr& target, std::size_t offset) const {
  const std::size_t n = model_->dim();
  if (offset + n > target->dim()) throw ModelMismatch("embed: target chart too small");
  for (std::size_t i = 0; i < n; ++i)
    if (!(target->coords()[offset + i] == model_->coords()[i]))
      throw ModelMismatch("embed: coordinate '" + model_->coord(i).name + "' does not match target");
  TermMap out;
  for (const auto& [m, c] : terms_) {
    Monomial r{std::vector<int>(target->dim(), 0), std::vector<int>(target->dim(), 0), m.phase};
    std::copy(m.powers.begin(), m.powers.end(), r.powers.begin() + static_cast<std::ptrdiff_t>(offset));
    std::copy(m.freqs.begin(), m.freqs.end(), r.freqs.begin() + static_cast<std::ptrdiff_t>(offset));
    out.emplace(std::move(r), c);
  }
  return ScalarField(target, std::move(out));
}

ScalarField ScalarField::restrict_to(const ModelPtr& smaller) const {
  if (!smaller->is_prefix_of(*model_))
    throw ModelMismatch("restrict_to: target is not a leading prefix of the model");
  const std::size_t n = smaller->dim();
  for (std::size_t i = n; i < model_->dim(); ++i)
    if (depends_on(i))
      throw ModelMismatch("restrict_to: field depends on dropped coordinate '" +
                          model_->coord(i).name + "'");
  TermMap out;
  for (const auto& [m, c] : terms_) {
    Monomial r = m;
    r.powers.resize(n);
    r.freqs.resize(n);
    out.emplace(std::move(r), c);
  }
  return ScalarField(smaller, std::move(out));
}

std::string ScalarField::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    std::vector<std::string> factors;
    for (std::size_t i = 0; i < m.powers.size(); ++i) {
      if (m.powers[i] == 0) continue;
      std::string f = model_->coord(i).name;
      if (m.powers[i] != 1) f += "^" + std::to_string(m.powers[i]);
      factors.push_back(std::move(f));
    }
    if (m.has_frequency())
      factors.push_back(std::string(m.phase == Phase::Cos ? "cos" : "sin") + "(2*pi*" +
                        frequency_text(*model_, m.freqs) + ")");
    double a = c;
    if (first) {
      if (a < 0) {
        out += "-";
        a = -a;
      }
    } else {
      out += a < 0 ? " - " : " + ";
      a = std::abs(a);
    }
    std::string term;
    if (a != 1.0 || factors.empty()) append_double(term, a);
    for (const auto& f : factors) {
      if (!term.empty()) term += "*";
      term += f;
    }
    out += term;
    first = false;
  }
  return out;
}

ScalarField field_mul(const ScalarField& a, const ScalarField& b) { return a * b; }
ScalarField partial(const ScalarField& a, std::size_t i) { return a.partial(i); }
ScalarField circle_average(const ScalarField& a, std::size_t q_index) {
  return a.circle_average(q_index);
}
double eval(const ScalarField& a, std::span<const double> point) { return a.eval(point); }

FieldEvaluator::FieldEvaluator(const ScalarField& f) {
  for (const auto& [m, c] : f.terms()) {
    Term t{c, m.phase == Phase::Sin, {}, {}};
    for (std::size_t i = 0; i < m.powers.size(); ++i) {
      if (m.powers[i] != 0) t.powers.emplace_back(static_cast<int>(i), m.powers[i]);
      if (m.freqs[i] != 0) t.freqs.emplace_back(static_cast<int>(i), kTwoPi * m.freqs[i]);
    }
    terms_.push_back(std::move(t));
  }
}

double FieldEvaluator::operator()(const double* x) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (const auto& [i, p] : t.powers) {
      double b = x[i], r = 1.0;
      for (int k = 0; k < p; ++k) r *= b;
      v *= r;
    }
    if (!t.freqs.empty()) {
      double arg = 0.0;
      for (const auto& [i, a] : t.freqs) arg += a * x[i];
      v *= t.sin ? std::sin(arg) : std::cos(arg);
    }
    sum += v;
  }
  return sum;
}

}  // namespace branelab
