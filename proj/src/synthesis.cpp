#include "rampc/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "rampc/riccati.hpp"

namespace rampc {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int r = static_cast<int>(j.size());
  if (r == 0) return {};
  const int c = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < c; ++k) M(i, k) = j.at(i).at(k).get<double>();
  }
  return M;
}

double lyapunov_decrease_min_eig(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P,
                                 const ParametricSystem& sys, const Eigen::VectorXd& theta,
                                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd Acl = closed_loop(sys, theta, K);
  const Eigen::MatrixXd gap =
      P - Acl.transpose() * P * Acl - Q - K.transpose() * R * K;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gap + gap.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

nlohmann::json SynthesisArtifacts::to_json() const {
  nlohmann::json j;
  j["K"] = matrix_to_json(K);
  j["P"] = matrix_to_json(P);
  j["X0"] = X0.to_json();
  j["lambda"] = lambda;
  j["c"] = std::vector<double>(c.data(), c.data() + c.size());
  j["w_bar"] = w_bar;
  j["u_tilde"] = std::vector<double>(u_tilde.data(), u_tilde.data() + u_tilde.size());
  j["Q"] = matrix_to_json(Q);
  j["R"] = matrix_to_json(R);
  j["N"] = N;
  j["F"] = matrix_to_json(F);
  j["G"] = matrix_to_json(G);
  j["config_hash"] = config_hash;
  return j;
}

SynthesisArtifacts SynthesisArtifacts::from_json(const nlohmann::json& j) {
  SynthesisArtifacts a;
  a.K = matrix_from_json(j.at("K"));
  a.P = matrix_from_json(j.at("P"));
  a.X0 = HPolytope::from_json(j.at("X0"));
  a.lambda = j.at("lambda").get<double>();
  const auto cv = j.at("c").get<std::vector<double>>();
  a.c = Eigen::Map<const Eigen::VectorXd>(cv.data(), static_cast<int>(cv.size()));
  a.w_bar = j.at("w_bar").get<double>();
  const auto uv = j.at("u_tilde").get<std::vector<double>>();
  a.u_tilde = Eigen::Map<const Eigen::VectorXd>(uv.data(), static_cast<int>(uv.size()));
  a.Q = matrix_from_json(j.at("Q"));
  a.R = matrix_from_json(j.at("R"));
  a.N = j.at("N").get<int>();
  a.F = matrix_from_json(j.at("F"));
  a.G = matrix_from_json(j.at("G"));
  a.config_hash = j.value("config_hash", "");
  return a;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> design_gain_and_cost(
    const ParametricSystem& sys, const Hyperbox& theta0, const Eigen::MatrixXd& Q,
    const Eigen::MatrixXd& R) {
  const auto [Ac, Bc] = eval_system(sys, theta0.center());
  if (!is_stabilizable(Ac, Bc)) {
    throw SynthesisError("design_gain_and_cost: center system not stabilizable");
  }
  const Eigen::MatrixXd P0 = dare_solve(Ac, Bc, Q, R);
  const Eigen::MatrixXd K = lqr_gain(Ac, Bc, P0, R);

  const auto vertices = box_vertices(theta0);
  for (int step = 0; step <= 990; ++step) {
    const double rho = 1.0 + 0.1 * step;
    bool ok = true;
    for (const auto& th : vertices) {
      if (lyapunov_decrease_min_eig(K, rho * P0, sys, th, Q, R) < -1e-9) {
        ok = false;
        break;
      }
    }
    if (ok) return {K, rho * P0};
  }
  throw SynthesisError(
      "design_gain_and_cost: Lyapunov decrease unattainable with LQR gain; "
      "shrink the parameter set or retune Q, R");
}

DecreaseReport verify_terminal_decrease(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P,
                                     const ParametricSystem& sys,
                                     const std::vector<Eigen::VectorXd>& theta_vertices,
                                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  DecreaseReport rep;
  rep.worst_min_eig = std::numeric_limits<double>::infinity();
  for (const auto& th : theta_vertices) {
    rep.worst_min_eig =
        std::min(rep.worst_min_eig, lyapunov_decrease_min_eig(K, P, sys, th, Q, R));
  }
  rep.ok = rep.worst_min_eig >= -1e-9;
  return rep;
}

std::pair<Eigen::VectorXd, double> tube_constants(const HPolytope& X0,
                                                  const ConstraintSet& Z,
                                                  const Eigen::MatrixXd& K,
                                                  const HPolytope& W) {
  const Eigen::MatrixXd FGK = Z.F + Z.G * K;
  Eigen::VectorXd c(Z.rows());
  for (int i = 0; i < Z.rows(); ++i) {
    c(i) = support(X0, FGK.row(i).transpose());
  }
  double w_bar = 0.0;
  for (int i = 0; i < X0.rows(); ++i) {
    w_bar = std::max(w_bar, support(W, X0.H.row(i).transpose()));
  }
  return {c, w_bar};
}

double lambda_bar(const HPolytope& X0, const ParametricSystem& sys,
                  const Eigen::MatrixXd& K, const Eigen::VectorXd& theta_center,
                  double eta) {
  const Eigen::MatrixXd Acl = closed_loop(sys, theta_center, K);
  double first = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < X0.rows(); ++i) {
    first = std::max(first, support(X0, (X0.H.row(i) * Acl).transpose()));
  }

  // Second term: worst regressor response over the unit parameter cube,
  // D(x, Kx) e_j being linear in x for each cube vertex e_j.
  const auto cube_verts =
      box_vertices(Hyperbox::cube(Eigen::VectorXd::Zero(sys.p()), 1.0));
  double second = 0.0;
  for (const auto& e : cube_verts) {
    Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(sys.n(), sys.n());
    for (int t = 0; t < sys.p(); ++t) {
      Me += e(t) * (sys.A[static_cast<size_t>(t) + 1] +
                    sys.B[static_cast<size_t>(t) + 1] * K);
    }
    for (int i = 0; i < X0.rows(); ++i) {
      second = std::max(second, support(X0, (X0.H.row(i) * Me).transpose()));
    }
  }
  return first + eta * second;
}

Eigen::VectorXd steady_state_robustification(
    const ParametricSystem& sys, const Hyperbox& theta0, const HPolytope& X0,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_ss_err) {
  std::vector<Eigen::VectorXd> samples;
  if (theta0.dim() == 1) {
    // exact enough for a scalar parameter: endpoints plus a dense grid
    constexpr int kGrid = 101;
    for (int i = 0; i < kGrid; ++i) {
      Eigen::VectorXd th(1);
      th(0) = theta0.lo(0) + (theta0.hi(0) - theta0.lo(0)) * i / (kGrid - 1);
      samples.push_back(th);
    }
  } else {
    samples = box_vertices(theta0);
  }

  Eigen::VectorXd u_tilde = Eigen::VectorXd::Zero(X0.rows());
  for (const auto& th : samples) {
    const auto [A, B] = eval_system(sys, th);
    const Eigen::VectorXd dist = B * u_ss_err(th);
    u_tilde = u_tilde.cwiseMax(X0.H * dist);
  }
  return u_tilde;
}

ValidationReport validate_artifacts(const SynthesisArtifacts& a, const ParametricSystem& sys,
                                    const Hyperbox& theta0, const HPolytope& W) {
  ValidationReport rep;

  const double terminal = a.lambda + a.c.maxCoeff() * a.w_bar;
  rep.terminal_margin = 1.0 - terminal;
  if (terminal > 1.0) {
    rep.failures.push_back("terminal precondition lambda + max_c * w_bar <= 1 violated");
  }

  // stale-cache guard: the stored dilation must match the disturbance set
  double w_bar_now = 0.0;
  for (int i = 0; i < a.X0.rows(); ++i) {
    w_bar_now = std::max(w_bar_now, support(W, a.X0.H.row(i).transpose()));
  }
  if (std::abs(w_bar_now - a.w_bar) > 1e-9 * std::max(1.0, std::abs(a.w_bar))) {
    rep.failures.push_back("stored w_bar does not match the disturbance set");
  }

  const auto vertices = box_vertices(theta0);
  const DecreaseReport a2 = verify_terminal_decrease(a.K, a.P, sys, vertices, a.Q, a.R);
  rep.decrease_min_eig = a2.worst_min_eig;
  if (!a2.ok) {
    rep.failures.push_back("Lyapunov decrease fails at a parameter vertex");
  }

  const ContractivityCertificate cert = verify_contractive(a.X0, sys, a.K, vertices);
  rep.contractivity = cert.lambda;
  if (cert.lambda > a.lambda + 1e-8) {
    rep.failures.push_back("tube cross-section is not lambda-contractive");
  }

  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace rampc
