#pragma once

#include <Eigen/Dense>

#include "rampc/model.hpp"
#include "rampc/polytope.hpp"

namespace rampc {

/// Raised when the observed transition is inconsistent with every parameter
/// in the current set, i.e. the disturbance bound was violated.
struct ModelFalsifiedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Set-membership identification state: a hypercube parameter set plus a
/// projected least-mean-squares point estimate. Values are immutable;
/// updates return new states.
struct EstimatorState {
  Hyperbox theta_set;
  Eigen::VectorXd theta_hat;
  double mu = 1.0;
  Hyperbox theta0;

  static EstimatorState initial(const Hyperbox& theta0, double mu);
};

/// Half-spaces in parameter space consistent with one observed transition:
/// -H_w D_prev theta <= h_w + H_w d_now.
HPolytope nonfalsified_halfspaces(const Eigen::MatrixXd& D_prev,
                                  const Eigen::VectorXd& d_now, const HPolytope& W);

/// Noise-robust variant: each offset is dilated by the worst case of the
/// measurement noise on the successor and, through A(theta), on the
/// predecessor. The result always contains the noiseless set.
HPolytope nonfalsified_halfspaces_noisy(const Eigen::MatrixXd& D_prev,
                                        const Eigen::VectorXd& d_now, const HPolytope& W,
                                        const HPolytope& M, const Hyperbox& theta_prev,
                                        const ParametricSystem& sys);

/// Intersects the current set with the new half-spaces, takes the tight
/// bounding box (2p LPs) and squares it to a hypercube of side = the largest
/// box side. Throws ModelFalsifiedError on an empty intersection. The point
/// estimate is re-projected into the new set.
EstimatorState update_theta_set(const EstimatorState& state, const HPolytope& halfspaces);

/// One least-mean-squares step on the prediction residual, then projection
/// (per-coordinate clamping) onto the current hypercube.
EstimatorState update_point_estimate(const EstimatorState& state,
                                     const Eigen::MatrixXd& D_prev,
                                     const Eigen::VectorXd& x_prev,
                                     const Eigen::VectorXd& u_prev,
                                     const Eigen::VectorXd& x_now,
                                     const ParametricSystem& sys);

/// Pushes the lower interval endpoint down by `factor`, clamped at `floor`
/// (scalar parameter only). Covers a multiplicative input-efficiency drop up
/// to `factor` occurring at any future step. `use_printed_min` selects the
/// variant that collapses straight to the floor.
EstimatorState dilate_lower_bound(const EstimatorState& state, double factor,
                                  double floor_value, bool use_printed_min = false);

/// Step-size bound 0.5 / sup ||D||_F^2 over the operating box.
double default_lms_gain(const ParametricSystem& sys, const Eigen::VectorXd& x_abs_bound,
                        const Eigen::VectorXd& u_abs_bound);

}  // namespace rampc
