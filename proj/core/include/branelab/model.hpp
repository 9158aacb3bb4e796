#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace branelab {

enum class CoordKind { Line, Circle };

struct Coordinate {
  std::string name;
  CoordKind kind = CoordKind::Line;

  bool operator==(const Coordinate&) const = default;
};

class ManifoldModel;
using ModelPtr = std::shared_ptr<const ManifoldModel>;

/// Declarative chart for a product model R^a x T^b.
///
/// Circles have period 1; a trig term cos(2*pi*k.x) stores the integer
/// vector k. The optional q coordinate is the distinguished S^1 factor and
/// the optional fiber coordinate is the Gotay R factor.
class ManifoldModel {
 public:
  static constexpr double kDefaultPruneEpsilon = 1e-12;

  /// Validates names (unique, non-empty identifiers) and the kinds of the
  /// distinguished coordinates.
  static ModelPtr make(std::vector<Coordinate> coords,
                       std::optional<std::size_t> q_index = std::nullopt,
                       std::optional<std::size_t> fiber_index = std::nullopt,
                       double prune_epsilon = kDefaultPruneEpsilon);

  /// N x S^1 with the new circle marked as the q coordinate.
  static ModelPtr with_circle(const ModelPtr& base, const std::string& name);
  /// Y x R with the new line marked as the fiber coordinate.
  static ModelPtr with_fiber(const ModelPtr& base, const std::string& name);
  /// Concatenation; names must stay unique. Distinguished indices are
  /// dropped unless only one factor carries them.
  static ModelPtr product(const ModelPtr& a, const ModelPtr& b);

  std::size_t dim() const noexcept { return coords_.size(); }
  const std::vector<Coordinate>& coords() const noexcept { return coords_; }
  const Coordinate& coord(std::size_t i) const;
  bool is_circle(std::size_t i) const { return coord(i).kind == CoordKind::Circle; }
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t require_index(const std::string& name) const;

  std::optional<std::size_t> q_index() const noexcept { return q_index_; }
  std::optional<std::size_t> fiber_index() const noexcept { return fiber_index_; }
  double prune_epsilon() const noexcept { return prune_epsilon_; }

  bool all_circles() const;

  /// True when `this` is a leading-coordinate sub-chart of `other`
  /// (same names and kinds on the first dim() coordinates).
  bool is_prefix_of(const ManifoldModel& other) const;

  /// Structural equality of coordinate lists and distinguished indices.
  bool same_chart(const ManifoldModel& other) const;

  /// Reduces circle coordinates into [0, 1).
  std::vector<double> wrap(std::span<const double> point) const;

 private:
  ManifoldModel() = default;

  std::vector<Coordinate> coords_;
  std::optional<std::size_t> q_index_;
  std::optional<std::size_t> fiber_index_;
  double prune_epsilon_ = kDefaultPruneEpsilon;
};

/// Throws ModelMismatch unless both pointers denote the same chart.
void require_same_model(const ModelPtr& a, const ModelPtr& b, const char* where);

}  // namespace branelab
