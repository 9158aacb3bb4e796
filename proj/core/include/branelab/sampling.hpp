#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "branelab/model.hpp"

namespace branelab {

struct Tolerances {
  double sample = 1e-8;         // pointwise residuals
  double max_condition = 1e8;   // above this a form counts as degenerate
  double gram = 1e-10;          // isotropy of tau_F
  double rank_rel = 1e-8;       // relative SVD threshold
  double fd = 1e-5;             // finite-difference closedness
};

/// Low-discrepancy sample points on a model chart.
///
/// Halton sequence with a seeded Cranley-Patterson rotation; circle
/// coordinates land in [0, 1), line coordinates in [-line_half_width,
/// line_half_width]. Pinned coordinates are held at a fixed value.
struct SamplePlan {
  std::size_t count = 256;
  std::uint64_t seed = 0;
  double line_half_width = 1.0;
  std::map<std::size_t, double> pinned;
  Tolerances tol;
  bool parallel = false;

  std::vector<std::vector<double>> points(const ManifoldModel& model) const;
};

/// Calls fn(i) for i in [0, n). With `parallel`, work is split across
/// hardware threads; callers write into per-index slots so aggregation stays
/// in index order.
void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn);

}  // namespace branelab
