#include "rampc/estimation.hpp"

namespace rampc {

EstimatorState EstimatorState::initial(const Hyperbox& theta0, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("EstimatorState: mu must be positive");
  EstimatorState s;
  s.theta_set = theta0;
  s.theta_hat = theta0.center();
  s.mu = mu;
  s.theta0 = theta0;
  return s;
}

HPolytope nonfalsified_halfspaces(const Eigen::MatrixXd& D_prev,
                                  const Eigen::VectorXd& d_now, const HPolytope& W) {
  if (D_prev.rows() != W.dim() || d_now.size() != W.dim()) {
    throw std::invalid_argument("nonfalsified_halfspaces: dimension mismatch");
  }
  HPolytope delta;
  delta.H = -W.H * D_prev;
  delta.h = W.h + W.H * d_now;
  return delta;
}

HPolytope nonfalsified_halfspaces_noisy(const Eigen::MatrixXd& D_prev,
                                        const Eigen::VectorXd& d_now, const HPolytope& W,
                                        const HPolytope& M, const Hyperbox& theta_prev,
                                        const ParametricSystem& sys) {
  HPolytope delta = nonfalsified_halfspaces(D_prev, d_now, W);
  const auto theta_verts = box_vertices(theta_prev);
  for (int r = 0; r < delta.rows(); ++r) {
    const Eigen::VectorXd row = W.H.row(r).transpose();
    double dilation = support(M, row);  // successor noise
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& th : theta_verts) {
      // predecessor noise propagated through A(theta); affine in theta and
      // linear in the noise, so vertex enumeration is exact
      const auto [A, B] = eval_system(sys, th);
      worst = std::max(worst, support(M, -(A.transpose() * row)));
    }
    delta.h(r) += dilation + worst;
  }
  return delta;
}

EstimatorState update_theta_set(const EstimatorState& state, const HPolytope& halfspaces) {
  const int p = state.theta_set.dim();
  if (halfspaces.dim() != p) {
    throw std::invalid_argument("update_theta_set: parameter dimension mismatch");
  }

  const HPolytope prev_box = state.theta_set.as_polytope();
  HPolytope inter;
  inter.H.resize(prev_box.rows() + halfspaces.rows(), p);
  inter.H << prev_box.H, halfspaces.H;
  inter.h.resize(prev_box.rows() + halfspaces.rows());
  inter.h << prev_box.h, halfspaces.h;

  Eigen::VectorXd lo(p), hi(p);
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e(i) = 1.0;
    const SolveReport up = lp_solve({e, inter.H, inter.h});
    if (up.status == SolveStatus::Infeasible) {
      throw ModelFalsifiedError(
          "update_theta_set: transition inconsistent with disturbance bound");
    }
    if (up.status != SolveStatus::Optimal) {
      throw std::runtime_error("update_theta_set: bounding LP failed");
    }
    const SolveReport dn = lp_solve({-e, inter.H, inter.h});
    if (dn.status != SolveStatus::Optimal) {
      throw std::runtime_error("update_theta_set: bounding LP failed");
    }
    hi(i) = up.objective;
    lo(i) = -dn.objective;
  }

  EstimatorState next = state;
  const Eigen::VectorXd center = 0.5 * (lo + hi);
  const double side = (hi - lo).maxCoeff();
  next.theta_set = Hyperbox::cube(center, std::max(side, 0.0));
  next.theta_hat =
      state.theta_hat.cwiseMax(next.theta_set.lo).cwiseMin(next.theta_set.hi);
  return next;
}

EstimatorState update_point_estimate(const EstimatorState& state,
                                     const Eigen::MatrixXd& D_prev,
                                     const Eigen::VectorXd& x_prev,
                                     const Eigen::VectorXd& u_prev,
                                     const Eigen::VectorXd& x_now,
                                     const ParametricSystem& sys) {
  const auto [A, B] = eval_system(sys, state.theta_hat);
  const Eigen::VectorXd residual = x_now - (A * x_prev + B * u_prev);
  EstimatorState next = state;
  const Eigen::VectorXd raw = state.theta_hat + state.mu * D_prev.transpose() * residual;
  next.theta_hat = raw.cwiseMax(state.theta_set.lo).cwiseMin(state.theta_set.hi);
  return next;
}

EstimatorState dilate_lower_bound(const EstimatorState& state, double factor,
                                  double floor_value, bool use_printed_min) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw std::invalid_argument("dilate_lower_bound: factor must lie in (0, 1]");
  }
  if (state.theta_set.dim() != 1) {
    throw std::invalid_argument("dilate_lower_bound: scalar parameter only");
  }
  EstimatorState next = state;
  const double lo = state.theta_set.lo(0);
  const double dilated = use_printed_min ? std::min(factor * lo, floor_value)
                                         : std::max(factor * lo, floor_value);
  Eigen::VectorXd new_lo(1), new_hi(1);
  new_lo(0) = std::min(dilated, state.theta_set.hi(0));
  new_hi(0) = state.theta_set.hi(0);
  next.theta_set = Hyperbox::bounds(new_lo, new_hi);
  next.theta_hat =
      state.theta_hat.cwiseMax(next.theta_set.lo).cwiseMin(next.theta_set.hi);
  return next;
}

double default_lms_gain(const ParametricSystem& sys, const Eigen::VectorXd& x_abs_bound,
                        const Eigen::VectorXd& u_abs_bound) {
  double norm_sq = 0.0;
  for (int i = 1; i <= sys.p(); ++i) {
    for (int r = 0; r < sys.n(); ++r) {
      const double bound = sys.A[static_cast<size_t>(i)].row(r).cwiseAbs().dot(x_abs_bound) +
                           sys.B[static_cast<size_t>(i)].row(r).cwiseAbs().dot(u_abs_bound);
      norm_sq += bound * bound;
    }
  }
  return 0.5 / std::max(norm_sq, 1e-12);
}

}  // namespace rampc
