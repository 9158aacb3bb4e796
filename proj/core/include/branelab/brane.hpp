#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "branelab/distribution.hpp"
#include "branelab/form.hpp"
#include "branelab/sampling.hpp"
#include "branelab/verdict.hpp"

namespace branelab {

/// Data of a candidate brane (Y, omega|_Y, F) with declared kernel E and
/// complement G.
struct BraneCandidate {
  std::string name;
  ModelPtr model;
  DifferentialForm omega;
  DifferentialForm F;
  Distribution E;
  Distribution G;
  /// 1-forms dual to the E frame and vanishing on G. Computed when [E|G]
  /// is constant; must be supplied otherwise (checked exactly).
  std::optional<std::vector<DifferentialForm>> coframe;

  BraneCandidate(std::string name, DifferentialForm omega, DifferentialForm F, Distribution E,
                 Distribution G, std::optional<std::vector<DifferentialForm>> coframe = std::nullopt);

  /// rank E + rank G = dim Y, transverse rank divisible by 4, frames jointly
  /// independent at samples. Throws FrameMismatch on violation.
  void validate(const SamplePlan& plan) const;
  /// The E-coframe, computing or verifying it. Throws FrameMismatch.
  std::vector<DifferentialForm> e_coframe() const;
};

/// Gotay model M = Y x R^k (k = rank E) with
/// Omega = pi* omega + sum_a d(t_a theta_a).
struct AmbientModel {
  ModelPtr model;
  DifferentialForm omega_M;
  std::vector<std::size_t> fiber_indices;

  static AmbientModel gotay(const BraneCandidate& c);
  /// Closedness (exact) and nondegeneracy at samples on Y x {0}.
  Verdict validate(const SamplePlan& plan) const;
};

using MatrixAt = std::function<Eigen::MatrixXd(std::span<const double>)>;

Verdict check_space_filling(const DifferentialForm& omega, const DifferentialForm& F, const SamplePlan& plan);

/// kernels_equal, F_closed, omega_closed, transverse_I_squares.
Verdict check_brane(const BraneCandidate& c, const SamplePlan& plan);

/// Pointwise part of the brane check for forms given as matrix callbacks:
/// kernels_equal and transverse_I_squares.
void check_brane_pointwise(const ModelPtr& model, const MatrixAt& omega, const MatrixAt& F,
                           const Distribution& E, const Distribution& G, const SamplePlan& plan,
                           Verdict& out);

/// Basis (columns, length 2 dim M: vector part then covector part) of
/// {(X, xi) : X in T_pY, xi|_{TY} = interior(X, F)} at p on Y.
Eigen::MatrixXd tau_F_subspace(const BraneCandidate& c, const AmbientModel& ambient,
                               std::span<const double> point_on_Y);
/// Gram matrix of a tau basis under <(X,xi),(Z,eta)> = (xi(Z) + eta(X)) / 2.
Eigen::MatrixXd split_pairing_gram(const Eigen::MatrixXd& tau);
/// J = [[0, -Omega^-1], [Omega, 0]] at an ambient point.
Eigen::MatrixXd generalized_J(const Eigen::MatrixXd& omega_M);

/// F closed, Omega closed and nondegenerate, characteristic distribution
/// of Y in M equals E, and J(tau_F) = tau_F at every sample.
Verdict check_brane_via_J(const BraneCandidate& c, const AmbientModel& ambient, const SamplePlan& plan);

/// Coordinates x1..x{2n}, y1..y{2n}, t1..tk with
/// omega = sum dx_{2j-1}^dy_{2j} + dy_{2j-1}^dx_{2j} and
/// F = sum dx_{2j-1}^dx_{2j} - dy_{2j-1}^dy_{2j}.
/// `suffix` is appended to every coordinate name (for products).
BraneCandidate local_normal_form(int n, int k, const std::string& suffix = "");

/// (Y1 x Y2, omega1 + omega2, F1 + F2) with concatenated frames.
BraneCandidate product(const BraneCandidate& a, const BraneCandidate& b);

}  // namespace branelab
