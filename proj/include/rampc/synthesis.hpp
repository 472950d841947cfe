#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampc/contractive.hpp"
#include "rampc/model.hpp"
#include "rampc/polytope.hpp"

namespace rampc {

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the online controller consumes, computed offline.
struct SynthesisArtifacts {
  Eigen::MatrixXd K;       // prestabilizing gain, u = K x + v
  Eigen::MatrixXd P;       // terminal cost
  HPolytope X0;            // contractive tube cross-section, h = 1
  double lambda = 0.0;     // contraction rate used online
  Eigen::VectorXd c;       // per-constraint-row support of X0
  double w_bar = 0.0;      // worst one-step disturbance dilation
  Eigen::VectorXd u_tilde; // optional hover-error dilation, size 0 when off
  Eigen::MatrixXd Q, R;
  int N = 0;
  Eigen::MatrixXd F, G;    // constraint rows the QP needs verbatim
  std::string config_hash;

  nlohmann::json to_json() const;
  static SynthesisArtifacts from_json(const nlohmann::json& j);
};

/// LQR design at the parameter-set center, with the terminal cost inflated
/// by the smallest scalar that restores the Lyapunov decrease at every
/// parameter vertex. Throws SynthesisError when no inflation <= 100 works.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> design_gain_and_cost(
    const ParametricSystem& sys, const Hyperbox& theta0, const Eigen::MatrixXd& Q,
    const Eigen::MatrixXd& R);

struct DecreaseReport {
  bool ok = false;
  double worst_min_eig = 0.0;
};

/// Checks P - A_cl'PA_cl - Q - K'RK >= 0 (up to 1e-9) at every vertex.
DecreaseReport verify_terminal_decrease(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P,
                                     const ParametricSystem& sys,
                                     const std::vector<Eigen::VectorXd>& theta_vertices,
                                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// c_i = max_{x in X0} [F + GK]_i x and w_bar = max_i max_{w in W} [H_x]_i w.
std::pair<Eigen::VectorXd, double> tube_constants(const HPolytope& X0,
                                                  const ConstraintSet& Z,
                                                  const Eigen::MatrixXd& K,
                                                  const HPolytope& W);

/// Two-term contraction bound at a given parameter-set center and side.
double lambda_bar(const HPolytope& X0, const ParametricSystem& sys,
                  const Eigen::MatrixXd& K, const Eigen::VectorXd& theta_center,
                  double eta);

/// Worst-case tube dilation caused by applying the hover input for an
/// estimated parameter while the true one differs. `u_ss_err` maps a
/// candidate true parameter to the applied-minus-true hover input error.
Eigen::VectorXd steady_state_robustification(
    const ParametricSystem& sys, const Hyperbox& theta0, const HPolytope& X0,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_ss_err);

struct ValidationReport {
  bool pass = false;
  std::vector<std::string> failures;
  double terminal_margin = 0.0;    // 1 - (lambda + max_c * w_bar)
  double decrease_min_eig = 0.0;
  double contractivity = 0.0;      // certified rate of X0
};

/// Revalidates a full artifact set: terminal precondition, Lyapunov decrease
/// at the vertices, and the contractivity certificate.
ValidationReport validate_artifacts(const SynthesisArtifacts& a, const ParametricSystem& sys,
                                    const Hyperbox& theta0, const HPolytope& W);

}  // namespace rampc
