#include "rampc/controller.hpp"

#include <limits>

namespace rampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Prediction {
  std::vector<Eigen::MatrixXd> S;  // x_l = S[l] x_k + T[l] V,   l = 0..N
  std::vector<Eigen::MatrixXd> T;  // T[l] is n x (N m)
};

Prediction condense(const ParametricSystem& sys, const Eigen::MatrixXd& K,
                    const Eigen::VectorXd& theta, int N) {
  const int n = sys.n();
  const int m = sys.m();
  const auto [A, B] = eval_system(sys, theta);
  const Eigen::MatrixXd Acl = A + B * K;

  Prediction pr;
  pr.S.resize(static_cast<size_t>(N) + 1);
  pr.T.resize(static_cast<size_t>(N) + 1);
  pr.S[0] = Eigen::MatrixXd::Identity(n, n);
  pr.T[0] = Eigen::MatrixXd::Zero(n, N * m);
  for (int l = 0; l < N; ++l) {
    pr.S[static_cast<size_t>(l) + 1] = Acl * pr.S[static_cast<size_t>(l)];
    pr.T[static_cast<size_t>(l) + 1] = Acl * pr.T[static_cast<size_t>(l)];
    pr.T[static_cast<size_t>(l) + 1].middleCols(l * m, m) += B;
  }
  return pr;
}

}  // namespace

QuadraticProgram build_qp(const Eigen::VectorXd& x_k, const EstimatorState& est,
                          const ControllerConfig& cfg, const ParametricSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  const int p = sys.p();
  const int N = cfg.N;
  const SynthesisArtifacts& art = cfg.artifacts;
  const int nx = art.X0.rows();
  const int nz = static_cast<int>(art.F.rows());
  if (x_k.size() != n || N < 1) {
    throw std::invalid_argument("build_qp: bad state or horizon");
  }
  if (art.F.cols() != n || art.G.cols() != m || art.K.rows() != m || art.K.cols() != n) {
    throw std::invalid_argument("build_qp: artifacts inconsistent with system");
  }
  if (cfg.mode == ControlMode::RobustBaseline && cfg.ss_update) {
    throw std::invalid_argument("build_qp: baseline mode requires ss_update off");
  }
  if (cfg.robustify_ss && art.u_tilde.size() != nx) {
    throw std::invalid_argument("build_qp: hover-error dilation not synthesized");
  }

  const Eigen::VectorXd theta_bar = est.theta_set.center();
  const double eta = est.theta_set.side();
  const Eigen::MatrixXd& K = art.K;
  const double lambda = art.lambda;

  const Prediction bar = condense(sys, K, theta_bar, N);
  const Prediction hat = condense(sys, K, est.theta_hat, N);

  const int nv_dim = N * m;
  const int dim = nv_dim + N;  // alpha_1..alpha_N appended after the v's
  const auto alpha_col = [&](int l) { return nv_dim + l - 1; };  // l >= 1

  // Cost over the point-estimate trajectory: stage Q/R plus terminal P.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  for (int l = 0; l <= N; ++l) {
    const Eigen::MatrixXd& Wl = (l == N) ? art.P : art.Q;
    const Eigen::MatrixXd& Tl = hat.T[static_cast<size_t>(l)];
    const Eigen::VectorXd xl0 = hat.S[static_cast<size_t>(l)] * x_k;
    H.topLeftCorner(nv_dim, nv_dim) += 2.0 * Tl.transpose() * Wl * Tl;
    g.head(nv_dim) += 2.0 * Tl.transpose() * (Wl * xl0);
    if (l < N) {
      // u_l = K x_l + v_l
      Eigen::MatrixXd Ul = K * Tl;
      Ul.middleCols(l * m, m) += Eigen::MatrixXd::Identity(m, m);
      const Eigen::VectorXd ul0 = K * xl0;
      H.topLeftCorner(nv_dim, nv_dim) += 2.0 * Ul.transpose() * art.R * Ul;
      g.head(nv_dim) += 2.0 * Ul.transpose() * (art.R * ul0);
    }
  }

  // Parameter-cube vertices for the regressor term.
  const auto cube = box_vertices(Hyperbox::cube(Eigen::VectorXd::Zero(p), 1.0));
  const int nv_theta = static_cast<int>(cube.size());
  std::vector<Eigen::MatrixXd> Mcl(cube.size()), Mb(cube.size());
  for (size_t j = 0; j < cube.size(); ++j) {
    Mcl[j] = Eigen::MatrixXd::Zero(n, n);
    Mb[j] = Eigen::MatrixXd::Zero(n, m);
    for (int t = 0; t < p; ++t) {
      Mcl[j] += cube[j](t) * (sys.A[static_cast<size_t>(t) + 1] +
                              sys.B[static_cast<size_t>(t) + 1] * K);
      Mb[j] += cube[j](t) * sys.B[static_cast<size_t>(t) + 1];
    }
  }

  const int rows = N * nz + N * nx * nv_theta + nx + N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(rows, -kInf);
  Eigen::VectorXd up = Eigen::VectorXd::Constant(rows, kInf);
  int r = 0;

  // joint constraints on the set-center trajectory, tightened by c alpha_l
  const Eigen::MatrixXd FGK = art.F + art.G * K;
  for (int l = 0; l < N; ++l) {
    const Eigen::MatrixXd& Tl = bar.T[static_cast<size_t>(l)];
    A.block(r, 0, nz, nv_dim) = FGK * Tl;
    A.block(r, l * m, nz, m) += art.G;
    if (l >= 1) A.block(r, alpha_col(l), nz, 1) = art.c;
    up.segment(r, nz) =
        Eigen::VectorXd::Ones(nz) - FGK * (bar.S[static_cast<size_t>(l)] * x_k);
    r += nz;
  }

  // tube growth: lambda alpha_l + w_bar (+ hover-error) + eta * regressor
  for (int l = 0; l < N; ++l) {
    const Eigen::MatrixXd& Tl = bar.T[static_cast<size_t>(l)];
    const Eigen::VectorXd xl0 = bar.S[static_cast<size_t>(l)] * x_k;
    for (int j = 0; j < nv_theta; ++j) {
      const auto ju = static_cast<size_t>(j);
      Eigen::MatrixXd rowsV = art.X0.H * (Mcl[ju] * Tl);
      rowsV.middleCols(l * m, m) += art.X0.H * Mb[ju];
      A.block(r, 0, nx, nv_dim) = eta * rowsV;
      if (l >= 1) A.block(r, alpha_col(l), nx, 1).setConstant(lambda);
      A.block(r, alpha_col(l + 1), nx, 1).setConstant(-1.0);
      Eigen::VectorXd rhs = Eigen::VectorXd::Constant(nx, -art.w_bar) -
                            eta * (art.X0.H * (Mcl[ju] * xl0));
      if (cfg.robustify_ss) rhs -= art.u_tilde;
      up.segment(r, nx) = rhs;
      r += nx;
    }
  }

  // terminal coverage of the final tube cross-section
  const double max_c = art.c.maxCoeff();
  {
    const Eigen::MatrixXd& Tn = bar.T[static_cast<size_t>(N)];
    A.block(r, 0, nx, nv_dim) = max_c * (art.X0.H * Tn);
    A.block(r, alpha_col(N), nx, 1).setConstant(max_c);
    up.segment(r, nx) = Eigen::VectorXd::Ones(nx) -
                        max_c * (art.X0.H * (bar.S[static_cast<size_t>(N)] * x_k));
    r += nx;
  }

  // dilations are nonnegative
  for (int l = 1; l <= N; ++l) {
    A(r, alpha_col(l)) = 1.0;
    lo(r) = 0.0;
    ++r;
  }

  return QuadraticProgram{H, g, A, lo, up};
}

TubeSolution solve_step(const Eigen::VectorXd& x_k, const EstimatorState& est,
                        const ControllerConfig& cfg, const ParametricSystem& sys,
                        const std::optional<Eigen::VectorXd>& warm) {
  const QuadraticProgram qp = build_qp(x_k, est, cfg, sys);
  const SolveReport rep = qp_solve(qp, warm, cfg.qp);
  if (rep.status != SolveStatus::Optimal) {
    throw InfeasibleStepError(std::string("per-step program not solved: ") +
                              to_string(rep.status));
  }

  const int n = sys.n();
  const int m = sys.m();
  const int N = cfg.N;
  TubeSolution sol;
  sol.report = rep;
  sol.v.resize(m, N);
  for (int l = 0; l < N; ++l) sol.v.col(l) = rep.solution.segment(l * m, m);
  sol.alpha.resize(N + 1);
  sol.alpha(0) = 0.0;
  sol.alpha.tail(N) = rep.solution.tail(N);

  sol.x_bar.resize(n, N + 1);
  sol.x_hat.resize(n, N + 1);
  sol.x_bar.col(0) = x_k;
  sol.x_hat.col(0) = x_k;
  const auto [Ab, Bb] = eval_system(sys, est.theta_set.center());
  const auto [Ah, Bh] = eval_system(sys, est.theta_hat);
  sol.cost = 0.0;
  for (int l = 0; l < N; ++l) {
    const Eigen::VectorXd ub = cfg.artifacts.K * sol.x_bar.col(l) + sol.v.col(l);
    const Eigen::VectorXd uh = cfg.artifacts.K * sol.x_hat.col(l) + sol.v.col(l);
    sol.x_bar.col(l + 1) = Ab * sol.x_bar.col(l) + Bb * ub;
    sol.x_hat.col(l + 1) = Ah * sol.x_hat.col(l) + Bh * uh;
    sol.cost += sol.x_hat.col(l).dot(cfg.artifacts.Q * sol.x_hat.col(l)) +
                uh.dot(cfg.artifacts.R * uh);
  }
  sol.cost += sol.x_hat.col(N).dot(cfg.artifacts.P * sol.x_hat.col(N));
  sol.u0 = cfg.artifacts.K * x_k + sol.v.col(0);
  return sol;
}

Eigen::VectorXd update_steady_state(const ControllerConfig& cfg, const EstimatorState& est,
                                    const QuadrotorParams& q) {
  Eigen::VectorXd theta;
  if (cfg.mode == ControlMode::RobustBaseline) {
    theta = cfg.baseline_theta;
  } else {
    theta = est.theta_set.center();
  }
  if (theta.size() != 1 || theta(0) <= 0.0) {
    throw std::invalid_argument("update_steady_state: nonpositive inverse mass");
  }
  const double mass = 1.0 / theta(0);
  const int m = static_cast<int>(cfg.artifacts.G.cols());
  if (m == 4) {
    return steady_state_input(q, mass);
  }
  Eigen::VectorXd u(1);
  u(0) = mass * q.gravity;
  return u;
}

}  // namespace rampc
