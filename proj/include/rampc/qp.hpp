#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rampc/lp.hpp"

namespace rampc {

/// Convex quadratic program  min 0.5 z'Hz + g'z  s.t.  l <= A z <= u.
/// Equalities are encoded by l = u. H must be symmetric positive
/// semi-definite.
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
};

struct QpSettings {
  double eps_abs = 1e-9;       // termination target on unscaled residuals
  double eps_contract = 1e-6;  // residual level required to report Optimal
  double eps_infeasible = 1e-9;
  int max_iterations = 20000;
  int check_interval = 25;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  bool adaptive_rho = true;
  bool polish = true;
};

/// Operator-splitting solver, dense. Deterministic for identical inputs and
/// warm starts. Throws std::invalid_argument on malformed input (asymmetric
/// or indefinite Hessian, l > u, dimension mismatch).
SolveReport qp_solve(const QuadraticProgram& p,
                     const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                     const QpSettings& settings = {});

}  // namespace rampc
