#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace rampc {

/// Discrete-time system x+ = A(theta) x + B(theta) u with
/// (A, B)(theta) = (A[0], B[0]) + sum_i theta_i (A[i], B[i]).
struct ParametricSystem {
  std::vector<Eigen::MatrixXd> A;  // size p + 1
  std::vector<Eigen::MatrixXd> B;  // size p + 1

  int n() const { return static_cast<int>(A.at(0).rows()); }
  int m() const { return static_cast<int>(B.at(0).cols()); }
  int p() const { return static_cast<int>(A.size()) - 1; }

  void validate() const;
};

/// Joint state/input constraints F x + G u <= 1.
struct ConstraintSet {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;

  int rows() const { return static_cast<int>(F.rows()); }
};

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eval_system(const ParametricSystem& sys,
                                                        const Eigen::VectorXd& theta);

/// Closed-loop matrix A(theta) + B(theta) K.
Eigen::MatrixXd closed_loop(const ParametricSystem& sys, const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& K);

/// Regressor matrix with column i = A[i] x + B[i] u (i = 1..p).
Eigen::MatrixXd d_matrix(const ParametricSystem& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u);

/// Offset A[0] x_prev + B[0] u_prev - x_now. For a disturbance-free
/// transition, -d_offset == d_matrix(x_prev, u_prev) * theta.
Eigen::VectorXd d_offset(const ParametricSystem& sys, const Eigen::VectorXd& x_prev,
                         const Eigen::VectorXd& u_prev, const Eigen::VectorXd& x_now);

/// Forward-Euler discretization applied per affine component:
/// A[0] -> I + Ts A[0], A[i] -> Ts A[i] for i >= 1, B[i] -> Ts B[i].
ParametricSystem discretize_euler(const ParametricSystem& continuous, double Ts);

}  // namespace rampc
