#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "branelab/brane.hpp"
#include "branelab/form.hpp"
#include "branelab/sampling.hpp"
#include "branelab/verdict.hpp"

namespace branelab {

/// First-order deformation (r, B) of a brane. r is stored through its
/// values rho_a = r(e_a) on the E frame and through the extension r_bar that
/// annihilates G.
struct InfDefPair {
  std::vector<ScalarField> rho;
  DifferentialForm B;
  DifferentialForm r_bar;

  /// r_bar = sum rho_a theta_a with theta the E-coframe of `c`.
  static InfDefPair make(const BraneCandidate& c, std::vector<ScalarField> rho, DifferentialForm B);
  static InfDefPair zero(const BraneCandidate& c);
};

/// r_foliated_closed, B_closed, B_horizontal, mixed_iii, quad_iv.
///
/// The lift of I[X] is taken in G. When G is involutive, quad_iv is the
/// type (1,1) test of B on G; otherwise it is the full quadratic identity.
/// EXACT when omega restricted to G is constant, SAMPLED otherwise.
Verdict check_infdef(const InfDefPair& pair, const BraneCandidate& c, const SamplePlan& plan);

/// Same content phrased through omega_dot = -d r_bar and F_dot = B, with
/// minimum-norm lifts of I[X] instead of lifts into G. Always SAMPLED
/// (except closedness of B): i_omega_dot_horizontal, ii_F_dot_closed,
/// ii_F_dot_horizontal, iii_kernel_condition, iv_quadratic.
Verdict infdef_general_check(const InfDefPair& pair, const BraneCandidate& c, const SamplePlan& plan);

/// True when brackets of the G frame stay in G (exact; false when the E
/// coframe is not available).
bool is_involutive_complement(const BraneCandidate& c);

/// For Y = N x S^1 with E = d/dq and G = TN: r = rho dq and
/// B = (B_N0 + d_N int_0^q gamma) + dq ^ gamma, gamma = I^* d_N rho.
/// Throws Type11Violation for a B_N0 that is not closed of type (1,1),
/// AverageObstruction when d_N of the q-average of gamma is non-zero, and
/// FrameMismatch when `c` does not have the product shape.
InfDefPair build_infdef(const ScalarField& rho, const DifferentialForm& B_N0, const BraneCandidate& c);

/// f -> (d_E f, L_{X_f} F) with X_f in G and omega(X_f, g) = g(f) on G.
/// This is the unsigned convention; the flow of the Hamiltonian lift gives
/// the negative of this pair. Needs omega|_G constant.
InfDefPair hamiltonian_generator(const ScalarField& f, const BraneCandidate& c);

/// The r component (as the 1-form r_bar).
DifferentialForm upsilon(const InfDefPair& pair);

/// r = rho dq on N x S^1 (q last). Conditions image_criterion
/// (d_N I^* d_N h = 0 for h the q-average of rho) and lie_reformulation
/// (L_{X_h} F_N = 0). Both exact.
Verdict upsilon_image_check(const DifferentialForm& r, const DifferentialForm& omega_N, const DifferentialForm& F_N);

/// One Fourier block (frequency k and -k) of the truncated complex
/// C^0 -> C^1 -> C^2. Columns of d0 and rows of d1/constraints live in the
/// ambient space (rho slots then 2-form slots); C^1 is the kernel of
/// `constraints`.
struct ComplexBlock {
  std::vector<int> freq;
  Eigen::MatrixXd d0;           // ambient x C^0
  Eigen::MatrixXd d1;           // C^2 x ambient
  Eigen::MatrixXd constraints;  // horizontal, mixed and quadratic rows
};

struct ComplexSlice {
  int truncation = 0;
  ModelPtr model;
  /// Labels such as "cos(2*pi*(x1 - y2))" for degree 0 and
  /// "rho0:..." / "dx1^dy1:..." for the ambient degree-1 space.
  std::vector<std::string> c0_basis, c1_basis, c2_basis;
  std::vector<ComplexBlock> blocks;

  Eigen::Index dim_c1 = 0;  // dimension of the constrained degree-1 space
  Eigen::Index ker_d1 = 0;  // dim ker d1 on C^1
  Eigen::Index rank_d0 = 0;
  Eigen::Index h1 = 0;
  double d1_d0_residual = 0.0;       // max |d1 d0|
  double cocycle_residual = 0.0;     // max |constraints d0|

  /// Dense matrices over the full bases (block order).
  Eigen::MatrixXd dense_d0() const;
  Eigen::MatrixXd dense_d1() const;
};

/// Constant-coefficient candidate on an all-circle chart; Fourier modes
/// with |k_i| <= truncation. Ranks use singular values above
/// rank_rel * max(1, largest singular value of the family).
ComplexSlice complex_slice(const BraneCandidate& c, int truncation, double rank_rel = 1e-8);

}  // namespace branelab
