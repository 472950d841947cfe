#include "rampc/contractive.hpp"

#include <Eigen/Eigenvalues>

namespace rampc {

namespace {

HPolytope stack_rows(const std::vector<Eigen::VectorXd>& rows, int dim) {
  HPolytope P;
  P.H.resize(static_cast<int>(rows.size()), dim);
  P.h = Eigen::VectorXd::Ones(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    P.H.row(static_cast<int>(i)) = rows[i].transpose();
  }
  return P;
}

double spectral_radius(const Eigen::MatrixXd& A) {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ContractivityCertificate verify_contractive(const HPolytope& X,
                                            const ParametricSystem& sys,
                                            const Eigen::MatrixXd& K,
                                            const std::vector<Eigen::VectorXd>& theta_vertices) {
  if (theta_vertices.empty()) {
    throw std::invalid_argument("verify_contractive: no parameter vertices");
  }
  if ((X.h.array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("verify_contractive: polytope must be in unit form h = 1");
  }

  ContractivityCertificate cert;
  cert.values.resize(X.rows(), static_cast<int>(theta_vertices.size()));
  for (size_t j = 0; j < theta_vertices.size(); ++j) {
    const Eigen::MatrixXd Acl = closed_loop(sys, theta_vertices[j], K);
    for (int i = 0; i < X.rows(); ++i) {
      const Eigen::VectorXd dir = (X.H.row(i) * Acl).transpose();
      cert.values(i, static_cast<int>(j)) = support(X, dir);
    }
  }
  cert.lambda = cert.values.maxCoeff();
  return cert;
}

HPolytope build_contractive(const ConstraintSet& Z, const ParametricSystem& sys,
                            const Eigen::MatrixXd& K,
                            const std::vector<Eigen::VectorXd>& theta_vertices,
                            double lambda, int max_rows) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("build_contractive: lambda must lie in (0, 1)");
  }
  if (theta_vertices.empty()) {
    throw std::invalid_argument("build_contractive: no parameter vertices");
  }

  const int n = static_cast<int>(Z.F.cols());
  std::vector<Eigen::MatrixXd> Acl;
  for (const auto& th : theta_vertices) {
    Acl.push_back(closed_loop(sys, th, K));
    if (spectral_radius(Acl.back()) >= 1.0 - 1e-12) {
      throw std::invalid_argument(
          "build_contractive: closed loop not Schur-stable at a parameter vertex");
    }
  }

  // Seed rows: the F block and the GK block, dropping rows that vanish.
  std::vector<Eigen::VectorXd> rows;
  const Eigen::MatrixXd GK = Z.G * K;
  for (int i = 0; i < Z.rows(); ++i) {
    if (Z.F.row(i).cwiseAbs().maxCoeff() > 1e-12) rows.push_back(Z.F.row(i).transpose());
  }
  for (int i = 0; i < Z.rows(); ++i) {
    if (GK.row(i).cwiseAbs().maxCoeff() > 1e-12) rows.push_back(GK.row(i).transpose());
  }
  if (rows.empty()) {
    throw std::invalid_argument("build_contractive: constraint rows are all zero");
  }
  const int n_seed = static_cast<int>(rows.size());

  // The seed set must be compact for the support LPs below to make sense.
  {
    const HPolytope seed = stack_rows(rows, n);
    for (int d = 0; d < n; ++d) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(d) = sgn;
        const SolveReport r = lp_solve({e, seed.H, seed.h});
        if (r.status == SolveStatus::Unbounded) {
          throw UnboundedSetError(
              "build_contractive: seed polytope unbounded; add state box constraints");
        }
      }
    }
  }

  constexpr double kExcessTol = 1e-9;
  size_t next = 0;
  size_t sweep_mark = rows.size();
  long generated = 0;
  while (next < rows.size()) {
    const HPolytope current = stack_rows(rows, n);
    for (const auto& A : Acl) {
      const Eigen::VectorXd dir = (rows[next].transpose() * A).transpose();
      const SolveReport r = lp_solve({dir, current.H, current.h});
      if (r.status != SolveStatus::Optimal) {
        throw std::runtime_error("build_contractive: support LP failed");
      }
      if (r.objective - lambda > kExcessTol) {
        rows.push_back(dir / lambda);
        ++generated;
        // Unreachable rates show up as resident rows past the cap, endless
        // generate-and-prune churn, or exploding row scales (the 1/lambda
        // recursion diverges exactly when the rate cannot close).
        if (static_cast<int>(rows.size()) > max_rows || generated > 20L * max_rows ||
            rows.back().cwiseAbs().maxCoeff() > 1e9) {
          throw ContractionBudgetError(
              "contraction rate lambda unreachable at this complexity budget");
        }
      }
    }
    ++next;

    if (next == sweep_mark && next < rows.size()) {
      // End of sweep: prune rows made redundant by later additions. Seed rows
      // are always retained; `next` tracks removals so checked rows stay
      // checked.
      size_t i = static_cast<size_t>(n_seed);
      while (i < rows.size() && rows.size() > 1) {
        const HPolytope others = [&] {
          std::vector<Eigen::VectorXd> rest;
          for (size_t k = 0; k < rows.size(); ++k) {
            if (k != i) rest.push_back(rows[k]);
          }
          return stack_rows(rest, n);
        }();
        const SolveReport r = lp_solve({rows[i], others.H, others.h});
        if (r.status == SolveStatus::Optimal && r.objective <= 1.0 + 1e-9) {
          rows.erase(rows.begin() + static_cast<long>(i));
          if (i < next) --next;
        } else {
          ++i;
        }
      }
      sweep_mark = rows.size();
    }
  }

  // Final prune keeps the half-space count low without changing the set.
  return remove_redundant(stack_rows(rows, n), n_seed);
}

}  // namespace rampc
