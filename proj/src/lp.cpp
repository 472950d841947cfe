#include "rampc/lp.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace rampc {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

namespace {

// Simplex working set: rows of [T | rhs] kept in reduced form, basis columns
// are unit vectors. Reduced costs are recomputed from scratch every pivot,
// which trades a constant factor for numerical robustness on the long
// contractive-polytope runs.
struct Tableau {
  Eigen::MatrixXd T;       // m x ncols
  Eigen::VectorXd rhs;     // m
  std::vector<int> basis;  // m, column index of the basic variable per row

  void pivot(int row, int col) {
    const double piv = T(row, col);
    T.row(row) /= piv;
    rhs(row) /= piv;
    T(row, col) = 1.0;  // kill round-off on the pivot itself
    for (int r = 0; r < T.rows(); ++r) {
      if (r == row) continue;
      const double f = T(r, col);
      if (f == 0.0) continue;
      T.row(r) -= f * T.row(row);
      rhs(r) -= f * rhs(row);
      T(r, col) = 0.0;
    }
    basis[static_cast<size_t>(row)] = col;
  }
};

// Reduced cost vector r = c - c_B' * T for the current basis.
Eigen::VectorXd reduced_costs(const Tableau& tab, const Eigen::VectorXd& cost) {
  Eigen::VectorXd r = cost;
  for (int i = 0; i < tab.T.rows(); ++i) {
    const double cb = cost(tab.basis[static_cast<size_t>(i)]);
    if (cb != 0.0) r -= cb * tab.T.row(i).transpose();
  }
  return r;
}

enum class PhaseResult { Optimal, Unbounded, IterationCap };

// Maximize cost' x over the tableau. `allowed` masks out columns that may
// not enter (artificials in phase 2).
PhaseResult run_simplex(Tableau& tab, const Eigen::VectorXd& cost,
                        const std::vector<bool>& allowed, double tol,
                        int max_iterations, int& iterations) {
  const int m = static_cast<int>(tab.T.rows());
  const int ncols = static_cast<int>(tab.T.cols());
  const int bland_after = 50 * (m + ncols);

  while (iterations < max_iterations) {
    const Eigen::VectorXd r = reduced_costs(tab, cost);

    // Entering column: Dantzig rule, Bland's rule once cycling is plausible.
    int enter = -1;
    if (iterations < bland_after) {
      double best = tol;
      for (int j = 0; j < ncols; ++j) {
        if (allowed[static_cast<size_t>(j)] && r(j) > best) {
          best = r(j);
          enter = j;
        }
      }
    } else {
      for (int j = 0; j < ncols; ++j) {
        if (allowed[static_cast<size_t>(j)] && r(j) > tol) {
          enter = j;
          break;
        }
      }
    }
    if (enter < 0) return PhaseResult::Optimal;

    // Ratio test; ties broken by smallest basis index for determinism.
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tab.T(i, enter);
      if (a <= 1e-11) continue;
      const double ratio = std::max(tab.rhs(i), 0.0) / a;
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 &&
           (leave < 0 || tab.basis[static_cast<size_t>(i)] <
                             tab.basis[static_cast<size_t>(leave)]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;

    tab.pivot(leave, enter);
    ++iterations;
  }
  return PhaseResult::IterationCap;
}

}  // namespace

SolveReport lp_solve(const LinearProgram& p, const LpSettings& settings) {
  const int n = static_cast<int>(p.objective.size());
  const int m = static_cast<int>(p.A.rows());
  if (n < 1 || m < 1 || p.A.cols() != n || p.b.size() != m) {
    throw std::invalid_argument("lp_solve: inconsistent program dimensions");
  }
  if (!p.objective.allFinite() || !p.A.allFinite() || !p.b.allFinite()) {
    throw std::invalid_argument("lp_solve: non-finite program data");
  }

  // Free variables are split as x = xp - xn; one slack per row; artificials
  // only where the (sign-corrected) right-hand side needs them.
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i) {
    if (p.b(i) < 0.0) art_rows.push_back(i);
  }
  const int n_art = static_cast<int>(art_rows.size());
  const int ncols = 2 * n + m + n_art;

  Tableau tab;
  tab.T.setZero(m, ncols);
  tab.rhs.resize(m);
  tab.basis.resize(static_cast<size_t>(m));

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = p.b(i) < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, n) = sign * p.A.row(i);
    tab.T.block(i, n, 1, n) = -sign * p.A.row(i);
    tab.T(i, 2 * n + i) = sign;
    tab.rhs(i) = sign * p.b(i);
    if (sign < 0.0) {
      tab.T(i, 2 * n + m + art) = 1.0;
      tab.basis[static_cast<size_t>(i)] = 2 * n + m + art;
      ++art;
    } else {
      tab.basis[static_cast<size_t>(i)] = 2 * n + i;
    }
  }

  SolveReport report;
  int iterations = 0;
  std::vector<bool> allowed(static_cast<size_t>(ncols), true);

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
    phase1.tail(n_art).setConstant(-1.0);  // max -sum(artificials)
    const PhaseResult pr = run_simplex(tab, phase1, allowed, settings.tol,
                                       settings.max_iterations, iterations);
    if (pr == PhaseResult::IterationCap) {
      report.status = SolveStatus::MaxIterations;
      report.iterations = iterations;
      return report;
    }
    double infeas = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[static_cast<size_t>(i)] >= 2 * n + m) infeas += tab.rhs(i);
    }
    if (infeas > 1e-7) {
      report.status = SolveStatus::Infeasible;
      report.iterations = iterations;
      report.primal_residual = infeas;
      return report;
    }
    // Drive any zero-level artificial out of the basis.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[static_cast<size_t>(i)] < 2 * n + m) continue;
      int enter = -1;
      for (int j = 0; j < 2 * n + m; ++j) {
        if (std::abs(tab.T(i, j)) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) tab.pivot(i, enter);
      // else: the row is all-zero in structural columns and stays inert.
    }
    for (int j = 2 * n + m; j < ncols; ++j) allowed[static_cast<size_t>(j)] = false;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ncols);
  phase2.head(n) = p.objective;
  phase2.segment(n, n) = -p.objective;
  const PhaseResult pr = run_simplex(tab, phase2, allowed, settings.tol,
                                     settings.max_iterations, iterations);
  report.iterations = iterations;
  if (pr == PhaseResult::IterationCap) {
    report.status = SolveStatus::MaxIterations;
    return report;
  }
  if (pr == PhaseResult::Unbounded) {
    report.status = SolveStatus::Unbounded;
    return report;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int b = tab.basis[static_cast<size_t>(i)];
    if (b < n) {
      x(b) += tab.rhs(i);
    } else if (b < 2 * n) {
      x(b - n) -= tab.rhs(i);
    }
  }

  report.status = SolveStatus::Optimal;
  report.solution = x;
  report.objective = p.objective.dot(x);
  report.primal_residual = (p.A * x - p.b).maxCoeff();
  if (report.primal_residual < 0.0) report.primal_residual = 0.0;
  return report;
}

}  // namespace rampc
