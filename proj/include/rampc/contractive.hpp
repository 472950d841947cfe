#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rampc/model.hpp"
#include "rampc/polytope.hpp"

namespace rampc {

struct ContractionBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-row, per-vertex worst-case one-step contraction of a unit polytope.
struct ContractivityCertificate {
  double lambda = 0.0;           // max of values
  Eigen::MatrixXd values;        // rows x vertices
};

/// Evaluates max_{x in X} [H_x]_i A_cl(theta_j) x for every row i and every
/// parameter vertex theta_j. X must be in unit form (h == 1). The polytope is
/// lambda-contractive over the vertex hull iff certificate.lambda <= lambda.
ContractivityCertificate verify_contractive(const HPolytope& X,
                                            const ParametricSystem& sys,
                                            const Eigen::MatrixXd& K,
                                            const std::vector<Eigen::VectorXd>& theta_vertices);

/// Grows {x : H x <= 1} from the stacked constraint rows [F; GK] until the
/// closed loop maps it into lambda times itself at every parameter vertex.
/// Appended rows have the form (1/lambda) [H]_i A_cl(theta_j); redundant
/// non-seed rows are pruned after each sweep.
HPolytope build_contractive(const ConstraintSet& Z, const ParametricSystem& sys,
                            const Eigen::MatrixXd& K,
                            const std::vector<Eigen::VectorXd>& theta_vertices,
                            double lambda, int max_rows = 200);

}  // namespace rampc
