#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "branelab/distribution.hpp"
#include "branelab/form.hpp"
#include "branelab/sampling.hpp"
#include "branelab/verdict.hpp"

namespace branelab {

/// Codimension-one deformation data: a symplectic (N, omega_N), an optional
/// space-filling F_N, and a function f on Y = N x S^1. The circle coordinate
/// of Y is the last one and is marked as q.
struct GraphDeformation {
  ModelPtr N_model;
  ModelPtr Y_model;
  DifferentialForm omega_N;
  std::optional<DifferentialForm> F_N;
  ScalarField f;

  /// `f` lives either on N (then it is q-independent) or on a chart N x S^1
  /// whose last coordinate is a circle. Throws ModelMismatch / DegreeError.
  GraphDeformation(DifferentialForm omega_N, ScalarField f, std::optional<DifferentialForm> F_N = std::nullopt);

  std::size_t n() const noexcept { return N_model->dim(); }
  std::size_t q_index() const noexcept { return N_model->dim(); }
  /// omega_N pulled back to Y.
  DifferentialForm omega_N_on_Y() const;
};

/// omega_N - d(f dq) on Y.
DifferentialForm omega_f(const GraphDeformation& g);

/// X_{f_q}: the N-Hamiltonian field of f at each fixed q, as a field on Y
/// with zero q component (interior(X, omega_N) = d_N f). Needs constant
/// omega_N; throws NonConstantForm otherwise.
VectorField hamiltonian_field(const GraphDeformation& g);
/// d/dq - X_{f_q}. Throws NonConstantForm for non-constant omega_N.
VectorField kernel_field(const GraphDeformation& g);
/// Pointwise version, normalized to q component 1. Works for any omega_N.
Eigen::VectorXd kernel_at(const GraphDeformation& g, std::span<const double> point_on_Y);

struct FlowOptions {
  int steps_per_unit = 1024;  // RK4 steps per unit of q
  bool estimate_error = true;  // rerun with half the step
  bool parallel = false;
  long max_steps = 1L << 24;
};

struct FlowSample {
  std::vector<double> point;         // on N
  std::vector<double> image;         // circle coordinates wrapped into [0, 1)
  std::vector<double> displacement;  // unwrapped image - point
  Eigen::MatrixXd jacobian;
  double symplectic_residual = 0.0;  // max |J^T W(image) J - W(point)|
  double error_estimate = 0.0;       // max |endpoint(h) - endpoint(h/2)|
};

/// Samples of the flow of x' = -X_{f_q}(x) from q0 to q1.
struct FlowResult {
  ModelPtr model;  // N
  double q0 = 0.0, q1 = 1.0;
  long steps = 0;
  double h = 0.0;
  std::vector<FlowSample> samples;

  double max_error_estimate() const;
  double max_symplectic_residual() const;
  /// Header then one row per sample: point, image, Jacobian (row-major),
  /// symplectic residual, error estimate.
  void write_csv(std::ostream& out) const;
};

/// Fixed-step RK4 with the variational equation for the Jacobian. Throws
/// FlowError on a non-positive step count, step underflow or a non-finite
/// state.
FlowResult flow(const GraphDeformation& g, double q0, double q1, const std::vector<std::vector<double>>& points,
                const FlowOptions& opts = {});

/// J^T F_N(image) J == F_N(point) at every flow sample, entrywise within tol.
Verdict invariance_check(const DifferentialForm& F_N, const FlowResult& result, double tol = 1e-8);

struct TransportOptions {
  std::size_t q_grid = 64;
  FlowOptions flow;
  /// Points on N for the time-one preservation test.
  SamplePlan plan = [] {
    SamplePlan p;
    p.count = 64;
    return p;
  }();
  double tol = 1e-8;
  /// Skip the closed-form path even when it applies.
  bool force_grid = false;
};

/// The extension of a 2-form on N x {0} to Y that is invariant under the
/// kernel field and killed by it.
///
/// When L_{X_q} F_N vanishes identically the extension is the exact form
/// pr^* F_N + dq ^ interior(X_q, F_N). Otherwise slices are computed by
/// flowing back to q = 0 on a uniform q grid and interpolated linearly in q;
/// node values are cached once per (node, point).
class TransportedForm {
 public:
  const ModelPtr& model() const noexcept;
  Mode mode() const noexcept;
  std::size_t q_grid() const noexcept;
  /// The closed form, present in EXACT mode.
  const std::optional<DifferentialForm>& exact() const noexcept;

  /// Full coefficient matrix on Y at (x, q).
  Eigen::MatrixXd matrix_at(std::span<const double> point_on_Y) const;
  /// The N block at (x, q).
  Eigen::MatrixXd slice_at(std::span<const double> point_on_Y) const;

  /// kernel_contains (<= tol.sample), slice_q0 (exact equality with F_N at
  /// q = 0) and closed_fd: central differences with spatial step `fd_step`
  /// at q midway between grid nodes, q step half a cell, so the residual is
  /// O(fd_step^2 + cell^2) (<= tol.fd).
  Verdict verify(const SamplePlan& plan, double fd_step = 1e-4) const;

  struct State;

 private:
  friend TransportedForm transport_brane(const GraphDeformation&, const DifferentialForm&, const TransportOptions&);
  explicit TransportedForm(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

/// Throws BraneObstruction when the time-one flow does not preserve F_N
/// at the plan's samples.
TransportedForm transport_brane(const GraphDeformation& g, const DifferentialForm& F_N,
                                const TransportOptions& opts = {});

/// I^* d_N f_q with I = omega_N^-1 F_N, as a 1-form on Y without dq part.
DifferentialForm istar_df(const GraphDeformation& g, const DifferentialForm& F_N);
/// d_N(I^* d_N f_q) == 0 exactly, q treated as a parameter.
Verdict closed1f_check(const GraphDeformation& g, const DifferentialForm& F_N);

/// On a chart with coordinates named x1, x2, y1, y2 (any order), the four
/// second-order expressions whose vanishing is closedness of I^* df for the
/// standard pair:
///   f_x1x1 + f_y1y1, f_x2x2 + f_y2y2, f_x1x2 + f_y1y2, f_x1y2 - f_y1x2.
std::array<ScalarField, 4> four_equations(const ScalarField& f);

/// Conditions i_involutive, ii_holonomy_invariant, iii_leafwise_closed,
/// dF_zero, all exact. Throws FrameMismatch when E is not the kernel of F.
Verdict melanie_check(const DifferentialForm& F, const Distribution& E, const Distribution& G,
                      const SamplePlan& plan);

/// psi(x, q) = (Phi^q(x), q) with its Jacobian on Y. The q column is a
/// central difference of the flow endpoint in q (step `dq`).
struct TorusMapPoint {
  std::vector<double> image;
  Eigen::MatrixXd jacobian;
};
TorusMapPoint mapping_torus_map(const GraphDeformation& g, std::span<const double> point_on_Y,
                                const FlowOptions& opts = {}, double dq = 1e-4);

/// pushes_dq_to_kernel, omega_pullback, F_pullback. EXACT for f = 0;
/// otherwise sampled with q snapped to transport grid nodes.
Verdict mapping_torus_check(const GraphDeformation& g, const DifferentialForm& F_N, const SamplePlan& plan,
                            const TransportOptions& opts = {});

}  // namespace branelab
