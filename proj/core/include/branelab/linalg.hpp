#pragma once

#include <Eigen/Dense>

namespace branelab {

/// sigma_max / sigma_min; +inf for singular or empty-rank matrices.
double condition_number(const Eigen::MatrixXd& m);

/// Numerical rank with singular values above rel_tol * sigma_max.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

/// Orthonormal basis (columns) of the right null space. Singular values
/// at or below rel_tol * max(1, sigma_max) count as zero.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

/// Orthonormal basis of the column space.
Eigen::MatrixXd column_space(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

/// Largest component of the columns of `a` orthogonal to the span of the
/// orthonormal columns of `q`: ||(I - Q Q^T) A||_max.
double outside_residual(const Eigen::MatrixXd& q, const Eigen::MatrixXd& a);

/// sin of the largest principal angle between two subspaces given by
/// orthonormal bases; 1 when the dimensions differ.
double subspace_distance(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2);

}  // namespace branelab
