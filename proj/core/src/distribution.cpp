#include "branelab/distribution.hpp"

#include <algorithm>

#include "branelab/errors.hpp"
#include "branelab/linalg.hpp"

namespace branelab {

Distribution::Distribution(ModelPtr model, std::vector<VectorField> frame)
    : model_(std::move(model)), frame_(std::move(frame)) {
  if (!model_) throw ModelError("null model");
  if (frame_.size() > model_->dim()) throw DegreeError("frame has more fields than dimensions");
  for (const auto& v : frame_) require_same_model(model_, v.model(), "distribution");
}

bool Distribution::is_constant() const noexcept {
  return std::all_of(frame_.begin(), frame_.end(), [](const auto& v) { return v.is_constant(); });
}

FieldMatrix Distribution::matrix() const {
  FieldMatrix m(model_, model_->dim(), frame_.size());
  for (std::size_t j = 0; j < frame_.size(); ++j)
    for (std::size_t i = 0; i < model_->dim(); ++i) m(i, j) = frame_[j][i];
  return m;
}

Eigen::MatrixXd Distribution::at(std::span<const double> point) const {
  Eigen::MatrixXd m(model_->dim(), frame_.size());
  for (std::size_t j = 0; j < frame_.size(); ++j)
    for (std::size_t i = 0; i < model_->dim(); ++i) m(i, j) = frame_[j][i].eval(point);
  return m;
}

Condition Distribution::independence(const SamplePlan& plan) const {
  const auto r = static_cast<Eigen::Index>(rank());
  if (is_constant()) {
    const Eigen::MatrixXd m = matrix().constant_value();
    const bool ok = numerical_rank(m, plan.tol.rank_rel) == r;
    Condition c;
    c.name = "frame_independent";
    c.mode = Mode::Exact;
    c.pass = ok;
    if (!ok) c.detail = "constant frame is rank deficient";
    return c;
  }
  SampleTracker t("frame_independent", 0.5);
  for (const auto& p : plan.points(*model_)) {
    const bool ok = numerical_rank(at(p), plan.tol.rank_rel) == r;
    t.observe(p, ok ? 0.0 : 1.0, ok ? "" : "rank drop");
  }
  return t.finish();
}

Distribution Distribution::extend_to(const ModelPtr& larger) const {
  std::vector<VectorField> f;
  for (const auto& v : frame_) f.push_back(v.extend_to(larger));
  return Distribution(larger, std::move(f));
}

Eigen::MatrixXd restrict_to_frame(const DifferentialForm& B, const Distribution& D,
                                  std::span<const double> point) {
  require_same_model(B.model(), D.model(), "restrict_to_frame");
  const Eigen::MatrixXd g = D.at(point);
  return g.transpose() * B.matrix_at(point) * g;
}

FieldMatrix restrict_to_frame(const DifferentialForm& B, const Distribution& D) {
  require_same_model(B.model(), D.model(), "restrict_to_frame");
  const FieldMatrix g = D.matrix();
  return g.transpose() * B.matrix() * g;
}

}  // namespace branelab
