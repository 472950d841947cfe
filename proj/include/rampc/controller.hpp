#pragma once

#include <optional>

#include "rampc/estimation.hpp"
#include "rampc/model.hpp"
#include "rampc/qp.hpp"
#include "rampc/quadrotor.hpp"
#include "rampc/synthesis.hpp"

namespace rampc {

/// Raised when the per-step program has no solution (or the solver stalls);
/// the caller decides on a fallback.
struct InfeasibleStepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ControlMode { Adaptive, RobustBaseline };

struct ControllerConfig {
  int N = 10;
  SynthesisArtifacts artifacts;
  ControlMode mode = ControlMode::Adaptive;
  bool ss_update = true;        // recompute the hover input from the set center
  bool robustify_ss = false;    // add the precomputed hover-error dilation
  Eigen::VectorXd baseline_theta;  // frozen parameter in RobustBaseline mode
  QpSettings qp;

  /// RobustBaseline forces the hover-input update off.
  void normalize() {
    if (mode == ControlMode::RobustBaseline) ss_update = false;
  }
};

/// One optimized step: correction sequence, tube dilations, and the nominal
/// trajectories for the set center and the point estimate.
struct TubeSolution {
  Eigen::MatrixXd v;      // m x N
  Eigen::VectorXd alpha;  // N + 1, alpha(0) == 0
  Eigen::MatrixXd x_bar;  // n x (N + 1)
  Eigen::MatrixXd x_hat;  // n x (N + 1)
  Eigen::VectorXd u0;     // applied input deviation K x + v_0
  double cost = 0.0;
  SolveReport report;
};

/// Assembles the per-step program over z = (v_0..N-1, alpha_1..N) with both
/// nominal trajectories condensed into affine functions of z.
QuadraticProgram build_qp(const Eigen::VectorXd& x_k, const EstimatorState& est,
                          const ControllerConfig& cfg, const ParametricSystem& sys);

/// Solves the step and unpacks the tube solution. Throws InfeasibleStepError
/// when the program is infeasible.
TubeSolution solve_step(const Eigen::VectorXd& x_k, const EstimatorState& est,
                        const ControllerConfig& cfg, const ParametricSystem& sys,
                        const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// Absolute hover input for the current estimate (mass scenarios use
/// mass = 1 / set-center); frozen at the configured parameter in
/// RobustBaseline mode.
Eigen::VectorXd update_steady_state(const ControllerConfig& cfg, const EstimatorState& est,
                                    const QuadrotorParams& q);

inline Eigen::VectorXd reference_shift(const Eigen::VectorXd& x_abs,
                                       const Eigen::VectorXd& ref) {
  return x_abs - ref;
}

inline Eigen::VectorXd reference_unshift(const Eigen::VectorXd& x_dev,
                                         const Eigen::VectorXd& ref) {
  return x_dev + ref;
}

}  // namespace rampc
