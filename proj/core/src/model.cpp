#include "branelab/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "branelab/errors.hpp"

namespace branelab {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

ModelPtr ManifoldModel::make(std::vector<Coordinate> coords, std::optional<std::size_t> q_index,
                             std::optional<std::size_t> fiber_index, double prune_epsilon) {
  if (coords.empty()) throw ModelError("model needs at least one coordinate");
  std::set<std::string> seen;
  for (const auto& c : coords) {
    if (!valid_identifier(c.name)) throw ModelError("invalid coordinate name '" + c.name + "'");
    if (!seen.insert(c.name).second) throw ModelError("duplicate coordinate name '" + c.name + "'");
  }
  if (q_index) {
    if (*q_index >= coords.size()) throw ModelError("q index out of range");
    if (coords[*q_index].kind != CoordKind::Circle)
      throw ModelError("q coordinate '" + coords[*q_index].name + "' must be a circle");
  }
  if (fiber_index) {
    if (*fiber_index >= coords.size()) throw ModelError("fiber index out of range");
    if (coords[*fiber_index].kind != CoordKind::Line)
      throw ModelError("fiber coordinate '" + coords[*fiber_index].name + "' must be a line");
  }
  if (!(prune_epsilon >= 0.0)) throw ModelError("prune epsilon must be non-negative");
  auto m = std::shared_ptr<ManifoldModel>(new ManifoldModel());
  m->coords_ = std::move(coords);
  m->q_index_ = q_index;
  m->fiber_index_ = fiber_index;
  m->prune_epsilon_ = prune_epsilon;
  return m;
}

ModelPtr ManifoldModel::with_circle(const ModelPtr& base, const std::string& name) {
  auto coords = base->coords_;
  coords.push_back({name, CoordKind::Circle});
  const std::size_t idx = coords.size() - 1;
  return make(std::move(coords), idx, base->fiber_index_, base->prune_epsilon_);
}

ModelPtr ManifoldModel::with_fiber(const ModelPtr& base, const std::string& name) {
  auto coords = base->coords_;
  coords.push_back({name, CoordKind::Line});
  const std::size_t idx = coords.size() - 1;
  return make(std::move(coords), base->q_index_, idx, base->prune_epsilon_);
}

ModelPtr ManifoldModel::product(const ModelPtr& a, const ModelPtr& b) {
  auto coords = a->coords_;
  coords.insert(coords.end(), b->coords_.begin(), b->coords_.end());
  const std::size_t off = a->dim();
  std::optional<std::size_t> q;
  if (a->q_index_ && !b->q_index_) q = a->q_index_;
  if (b->q_index_ && !a->q_index_) q = *b->q_index_ + off;
  std::optional<std::size_t> fib;
  if (a->fiber_index_ && !b->fiber_index_) fib = a->fiber_index_;
  if (b->fiber_index_ && !a->fiber_index_) fib = *b->fiber_index_ + off;
  return make(std::move(coords), q, fib, std::max(a->prune_epsilon_, b->prune_epsilon_));
}

const Coordinate& ManifoldModel::coord(std::size_t i) const {
  if (i >= coords_.size())
    throw ModelError("coordinate index " + std::to_string(i) + " out of range (dim " +
                     std::to_string(coords_.size()) + ")");
  return coords_[i];
}

std::optional<std::size_t> ManifoldModel::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < coords_.size(); ++i)
    if (coords_[i].name == name) return i;
  return std::nullopt;
}

std::size_t ManifoldModel::require_index(const std::string& name) const {
  auto i = index_of(name);
  if (!i) throw ModelError("unknown coordinate '" + name + "'");
  return *i;
}

bool ManifoldModel::all_circles() const {
  for (const auto& c : coords_)
    if (c.kind != CoordKind::Circle) return false;
  return true;
}

bool ManifoldModel::is_prefix_of(const ManifoldModel& other) const {
  if (dim() > other.dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(coords_[i] == other.coords_[i])) return false;
  return true;
}

bool ManifoldModel::same_chart(const ManifoldModel& other) const {
  return coords_ == other.coords_ && q_index_ == other.q_index_ &&
         fiber_index_ == other.fiber_index_;
}

std::vector<double> ManifoldModel::wrap(std::span<const double> point) const {
  if (point.size() != dim())
    throw ModelError("point has dimension " + std::to_string(point.size()) + ", model has " +
                     std::to_string(dim()));
  std::vector<double> out(point.begin(), point.end());
  for (std::size_t i = 0; i < dim(); ++i)
    if (coords_[i].kind == CoordKind::Circle) out[i] -= std::floor(out[i]);
  return out;
}

void require_same_model(const ModelPtr& a, const ModelPtr& b, const char* where) {
  if (a == b) return;
  if (!a || !b || !a->same_chart(*b)) throw ModelMismatch(std::string(where) + ": model mismatch");
}

}  // namespace branelab
