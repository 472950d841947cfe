#include "rampc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const QuadraticProgram& p) {
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.A.rows());
  if (p.H.cols() != n || p.g.size() != n || (m > 0 && p.A.cols() != n) ||
      p.l.size() != m || p.u.size() != m) {
    throw std::invalid_argument("qp_solve: inconsistent program dimensions");
  }
  if (!p.H.allFinite() || !p.g.allFinite() || !p.A.allFinite()) {
    throw std::invalid_argument("qp_solve: non-finite program data");
  }
  const double hscale = std::max(1.0, p.H.cwiseAbs().maxCoeff());
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * hscale) {
    throw std::invalid_argument("qp_solve: Hessian not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.H, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8 * hscale) {
    throw std::invalid_argument("qp_solve: Hessian not positive semi-definite");
  }
  for (int i = 0; i < m; ++i) {
    if (std::isnan(p.l(i)) || std::isnan(p.u(i)) || p.l(i) > p.u(i)) {
      throw std::invalid_argument("qp_solve: bounds require l <= u");
    }
  }
}

// Modified Ruiz equilibration: D, E scale variables and constraints, c scales
// the cost. All deterministic.
struct Scaling {
  Eigen::VectorXd D, E;
  double c = 1.0;
};

Scaling ruiz(Eigen::MatrixXd& H, Eigen::VectorXd& g, Eigen::MatrixXd& A,
             Eigen::VectorXd& l, Eigen::VectorXd& u) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());
  Scaling s;
  s.D = Eigen::VectorXd::Ones(n);
  s.E = Eigen::VectorXd::Ones(m);

  for (int iter = 0; iter < 10; ++iter) {
    Eigen::VectorXd dx(n), de(m);
    for (int j = 0; j < n; ++j) {
      double norm = H.col(j).cwiseAbs().maxCoeff();
      if (m > 0) norm = std::max(norm, A.col(j).cwiseAbs().maxCoeff());
      dx(j) = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
    }
    for (int i = 0; i < m; ++i) {
      const double norm = A.row(i).cwiseAbs().maxCoeff();
      de(i) = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
    }
    H = dx.asDiagonal() * H * dx.asDiagonal();
    g = dx.cwiseProduct(g);
    if (m > 0) {
      A = de.asDiagonal() * A * dx.asDiagonal();
      l = de.cwiseProduct(l);
      u = de.cwiseProduct(u);
    }
    s.D = s.D.cwiseProduct(dx);
    s.E = s.E.cwiseProduct(de);

    // Cost scaling keeps the Hessian and gradient on comparable footing.
    double hn = 0.0;
    for (int j = 0; j < n; ++j) hn += H.col(j).cwiseAbs().maxCoeff();
    hn = std::max(hn / n, g.cwiseAbs().maxCoeff());
    const double gamma = hn > 1e-12 ? 1.0 / hn : 1.0;
    H *= gamma;
    g *= gamma;
    s.c *= gamma;
  }
  return s;
}

struct Workspace {
  Eigen::MatrixXd H, A;
  Eigen::VectorXd g, l, u;
  Eigen::VectorXd rho;  // per-row step size
  Eigen::LLT<Eigen::MatrixXd> llt;
  double sigma = 1e-6;

  void factor() {
    Eigen::MatrixXd M = H;
    M.diagonal().array() += sigma;
    if (A.rows() > 0) M.noalias() += A.transpose() * rho.asDiagonal() * A;
    llt.compute(M);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("qp_solve: KKT factorization failed");
    }
  }
};

// Residuals of the original (unscaled) problem at (x, z, y).
struct Residuals {
  double prim = 0.0;
  double dual = 0.0;
};

Residuals unscaled_residuals(const QuadraticProgram& p, const Scaling& s,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                             const Eigen::VectorXd& y) {
  Residuals r;
  const Eigen::VectorXd xu = s.D.cwiseProduct(x);
  const Eigen::VectorXd yu = s.E.cwiseProduct(y) / s.c;
  if (p.A.rows() > 0) {
    const Eigen::VectorXd zu = s.E.cwiseInverse().cwiseProduct(z);
    r.prim = (p.A * xu - zu).cwiseAbs().maxCoeff();
    r.dual = (p.H * xu + p.g + p.A.transpose() * yu).cwiseAbs().maxCoeff();
  } else {
    r.dual = (p.H * xu + p.g).cwiseAbs().maxCoeff();
  }
  return r;
}

// Solution polish: solve the KKT system restricted to the active set, with
// small regularization and iterative refinement.
bool polish(const Workspace& w, Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const int n = static_cast<int>(w.H.rows());
  const int m = static_cast<int>(w.A.rows());
  constexpr double delta = 1e-7;

  std::vector<int> low, upp;
  for (int i = 0; i < m; ++i) {
    if (y(i) < -1e-10 && w.l(i) > -kInf) low.push_back(i);
    if (y(i) > 1e-10 && w.u(i) < kInf) upp.push_back(i);
  }
  const int na = static_cast<int>(low.size() + upp.size());
  const int k = n + na;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
  K.topLeftCorner(n, n) = w.H;
  K.topLeftCorner(n, n).diagonal().array() += delta;
  Eigen::VectorXd rhs(k);
  rhs.head(n) = -w.g;
  for (int a = 0; a < na; ++a) {
    const int i = a < static_cast<int>(low.size())
                      ? low[static_cast<size_t>(a)]
                      : upp[static_cast<size_t>(a - low.size())];
    K.block(n + a, 0, 1, n) = w.A.row(i);
    K.block(0, n + a, n, 1) = w.A.row(i).transpose();
    K(n + a, n + a) = -delta;
    rhs(n + a) = a < static_cast<int>(low.size()) ? w.l(i) : w.u(i);
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  Eigen::VectorXd t = lu.solve(rhs);
  for (int ref = 0; ref < 3; ++ref) {
    // one step of refinement against the unregularized system
    Eigen::MatrixXd K0 = K;
    K0.topLeftCorner(n, n).diagonal().array() -= delta;
    for (int a = 0; a < na; ++a) K0(n + a, n + a) = 0.0;
    t += lu.solve(rhs - K0 * t);
  }
  if (!t.allFinite()) return false;

  x = t.head(n);
  y.setZero();
  for (int a = 0; a < na; ++a) {
    const int i = a < static_cast<int>(low.size())
                      ? low[static_cast<size_t>(a)]
                      : upp[static_cast<size_t>(a - low.size())];
    y(i) = t(n + a);
  }
  return true;
}

}  // namespace

SolveReport qp_solve(const QuadraticProgram& p,
                     const std::optional<Eigen::VectorXd>& warm_start,
                     const QpSettings& settings) {
  validate(p);
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.A.rows());

  Workspace w;
  w.H = p.H;
  w.g = p.g;
  w.A = p.A;
  w.l = p.l;
  w.u = p.u;
  w.sigma = settings.sigma;
  const Scaling s = ruiz(w.H, w.g, w.A, w.l, w.u);

  w.rho.resize(m);
  double rho_bar = settings.rho;
  auto set_rho = [&](double r) {
    rho_bar = std::clamp(r, 1e-6, 1e6);
    for (int i = 0; i < m; ++i) {
      const bool eq = w.u(i) - w.l(i) < 1e-12;
      w.rho(i) = eq ? 1e3 * rho_bar : rho_bar;
    }
  };
  set_rho(rho_bar);
  w.factor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (warm_start) {
    if (warm_start->size() != n) {
      throw std::invalid_argument("qp_solve: warm start has wrong dimension");
    }
    x = s.D.cwiseInverse().cwiseProduct(*warm_start);
  }
  Eigen::VectorXd z = (w.A * x).cwiseMax(w.l).cwiseMin(w.u);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  SolveReport report;
  Eigen::VectorXd x_prev = x, y_prev = y;

  auto finish = [&](SolveStatus st, int iter) {
    report.status = st;
    report.iterations = iter;
    if (st == SolveStatus::Optimal) {
      const Eigen::VectorXd xu = s.D.cwiseProduct(x);
      report.solution = xu;
      report.objective = 0.5 * xu.dot(p.H * xu) + p.g.dot(xu);
      const Residuals r = unscaled_residuals(p, s, x, z, y);
      report.primal_residual = r.prim;
      report.dual_residual = r.dual;
    }
    return report;
  };

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    // x-update via the condensed normal equations, then relaxed z/y updates.
    Eigen::VectorXd rhs = settings.sigma * x - w.g;
    if (m > 0) rhs.noalias() += w.A.transpose() * (w.rho.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = w.llt.solve(rhs);
    const Eigen::VectorXd z_tilde = w.A * x_tilde;

    x_prev = x;
    y_prev = y;
    x = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
    if (m > 0) {
      const Eigen::VectorXd z_relax =
          settings.alpha * z_tilde + (1.0 - settings.alpha) * z;
      const Eigen::VectorXd z_new =
          (z_relax + w.rho.cwiseInverse().cwiseProduct(y)).cwiseMax(w.l).cwiseMin(w.u);
      y += w.rho.cwiseProduct(z_relax - z_new);
      z = z_new;
    }

    if (iter % settings.check_interval != 0 && iter != settings.max_iterations) {
      continue;
    }

    const Residuals r = unscaled_residuals(p, s, x, z, y);
    if (r.prim <= settings.eps_abs && r.dual <= settings.eps_abs) {
      if (settings.polish && m > 0) {
        Eigen::VectorXd xp = x, yp = y;
        if (polish(w, xp, yp)) {
          Eigen::VectorXd zp = (w.A * xp).cwiseMax(w.l).cwiseMin(w.u);
          const Residuals rp = unscaled_residuals(p, s, xp, zp, yp);
          if (std::max(rp.prim, rp.dual) < std::max(r.prim, r.dual)) {
            x = xp;
            y = yp;
            z = zp;
          }
        }
      }
      return finish(SolveStatus::Optimal, iter);
    }

    if (m > 0) {
      // Infeasibility certificates from the iterate differences.
      const Eigen::VectorXd dy = y - y_prev;
      const double dy_norm = dy.cwiseAbs().maxCoeff();
      if (dy_norm > 1e-14) {
        const double atdy = (w.A.transpose() * dy).cwiseAbs().maxCoeff();
        double gap = 0.0;
        bool bounded_dirs = true;
        for (int i = 0; i < m; ++i) {
          if (dy(i) > 0.0) {
            if (w.u(i) >= kInf) bounded_dirs = false;
            else gap += w.u(i) * dy(i);
          } else if (dy(i) < 0.0) {
            if (w.l(i) <= -kInf) bounded_dirs = false;
            else gap += w.l(i) * dy(i);
          }
        }
        if (bounded_dirs && atdy <= settings.eps_infeasible * dy_norm &&
            gap < -settings.eps_infeasible * dy_norm) {
          report.primal_residual = atdy / dy_norm;
          return finish(SolveStatus::Infeasible, iter);
        }
      }
      const Eigen::VectorXd dx = x - x_prev;
      const double dx_norm = dx.cwiseAbs().maxCoeff();
      if (dx_norm > 1e-14) {
        const double hdx = (w.H * dx).cwiseAbs().maxCoeff();
        const Eigen::VectorXd adx = w.A * dx;
        bool recession = true;
        for (int i = 0; i < m; ++i) {
          if (w.u(i) < kInf && adx(i) > settings.eps_infeasible * dx_norm) recession = false;
          if (w.l(i) > -kInf && adx(i) < -settings.eps_infeasible * dx_norm) recession = false;
        }
        if (recession && hdx <= settings.eps_infeasible * dx_norm &&
            w.g.dot(dx) < -settings.eps_infeasible * dx_norm) {
          report.primal_residual = hdx / dx_norm;
          return finish(SolveStatus::Unbounded, iter);
        }
      }
    } else if (r.dual <= settings.eps_abs) {
      return finish(SolveStatus::Optimal, iter);
    }

    if (settings.adaptive_rho && m > 0 && iter % (4 * settings.check_interval) == 0) {
      const Eigen::VectorXd ax = w.A * x;
      const double pn = std::max({ax.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(), 1e-12});
      const double dn = std::max({(w.H * x).cwiseAbs().maxCoeff(),
                                  (w.A.transpose() * y).cwiseAbs().maxCoeff(),
                                  w.g.cwiseAbs().maxCoeff(), 1e-12});
      const Residuals rs = r;
      const double ratio = (rs.prim / pn) / std::max(rs.dual / dn, 1e-16);
      if (ratio > 25.0 || ratio < 0.04) {
        set_rho(rho_bar * std::sqrt(ratio));
        w.factor();
      }
    }
  }

  // Iteration cap: report Optimal only if the contract tolerance is met.
  const Residuals r = unscaled_residuals(p, s, x, z, y);
  if (r.prim <= settings.eps_contract && r.dual <= settings.eps_contract) {
    return finish(SolveStatus::Optimal, settings.max_iterations);
  }
  report.primal_residual = r.prim;
  report.dual_residual = r.dual;
  return finish(SolveStatus::MaxIterations, settings.max_iterations);
}

}  // namespace rampc
