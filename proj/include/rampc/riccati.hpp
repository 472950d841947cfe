#pragma once

#include <Eigen/Dense>

namespace rampc {

/// Solves the discrete algebraic Riccati equation
///   P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q
/// by the structure-preserving doubling iteration. Requires (A, B)
/// stabilizable, Q >= 0 symmetric, R > 0 symmetric.
Eigen::MatrixXd dare_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Stabilizing state feedback for u = K x:
///   K = -(R + B'PB)^{-1} B'PA  with P the Riccati solution.
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& P, const Eigen::MatrixXd& R);

/// PBH test on every eigenvalue with |lambda| >= 1.
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace rampc
