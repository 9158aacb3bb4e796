#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "branelab/field_matrix.hpp"
#include "branelab/form.hpp"
#include "branelab/sampling.hpp"
#include "branelab/vector_field.hpp"
#include "branelab/verdict.hpp"

namespace branelab {

/// Distribution given by a spanning frame of vector fields.
class Distribution {
 public:
  Distribution(ModelPtr model, std::vector<VectorField> frame);

  const ModelPtr& model() const noexcept { return model_; }
  std::size_t rank() const noexcept { return frame_.size(); }
  const std::vector<VectorField>& frame() const noexcept { return frame_; }
  const VectorField& operator[](std::size_t i) const { return frame_.at(i); }

  bool is_constant() const noexcept;
  /// dim x rank matrix whose columns are the frame fields.
  FieldMatrix matrix() const;
  Eigen::MatrixXd at(std::span<const double> point) const;

  /// Frame has full rank at every sample (exact when constant).
  Condition independence(const SamplePlan& plan) const;

  Distribution extend_to(const ModelPtr& larger) const;

 private:
  ModelPtr model_;
  std::vector<VectorField> frame_;
};

/// Gram-style matrix B(e_i, e_j) over the frame at p.
Eigen::MatrixXd restrict_to_frame(const DifferentialForm& B, const Distribution& D,
                                  std::span<const double> point);
/// Same, exactly, as a matrix of fields.
FieldMatrix restrict_to_frame(const DifferentialForm& B, const Distribution& D);

}  // namespace branelab
