#pragma once

#include <Eigen/Dense>

namespace rampc {

/// Exit status shared by the LP and QP solvers.
enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(SolveStatus s);

/// Result of a solve. `solution` is populated only when status == Optimal.
struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd solution;
  double objective = 0.0;
  int iterations = 0;
  /// Worst constraint violation of the returned point (Optimal), or the
  /// certificate residual (Infeasible).
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Linear program  max  objective . x  s.t.  A x <= b,  x free.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct LpSettings {
  int max_iterations = 20000;
  double tol = 1e-9;
};

/// Dense two-phase primal simplex. Deterministic: identical programs give
/// bitwise-identical reports.
SolveReport lp_solve(const LinearProgram& p, const LpSettings& settings = {});

}  // namespace rampc
