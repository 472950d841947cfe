#include "rampc/model.hpp"

#include <stdexcept>

namespace rampc {

void ParametricSystem::validate() const {
  if (A.empty() || B.empty() || A.size() != B.size() || A.size() < 2) {
    throw std::invalid_argument("ParametricSystem: need matrices for i = 0..p with p >= 1");
  }
  const int nn = n();
  const int mm = m();
  for (const auto& Ai : A) {
    if (Ai.rows() != nn || Ai.cols() != nn) {
      throw std::invalid_argument("ParametricSystem: inconsistent A dimensions");
    }
  }
  for (const auto& Bi : B) {
    if (Bi.rows() != nn || Bi.cols() != mm) {
      throw std::invalid_argument("ParametricSystem: inconsistent B dimensions");
    }
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eval_system(const ParametricSystem& sys,
                                                        const Eigen::VectorXd& theta) {
  if (theta.size() != sys.p()) {
    throw std::invalid_argument("eval_system: theta dimension mismatch");
  }
  Eigen::MatrixXd A = sys.A[0];
  Eigen::MatrixXd B = sys.B[0];
  for (int i = 0; i < sys.p(); ++i) {
    A += theta(i) * sys.A[static_cast<size_t>(i) + 1];
    B += theta(i) * sys.B[static_cast<size_t>(i) + 1];
  }
  return {A, B};
}

Eigen::MatrixXd closed_loop(const ParametricSystem& sys, const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& K) {
  auto [A, B] = eval_system(sys, theta);
  return A + B * K;
}

Eigen::MatrixXd d_matrix(const ParametricSystem& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  if (x.size() != sys.n() || u.size() != sys.m()) {
    throw std::invalid_argument("d_matrix: state/input dimension mismatch");
  }
  Eigen::MatrixXd D(sys.n(), sys.p());
  for (int i = 0; i < sys.p(); ++i) {
    D.col(i) = sys.A[static_cast<size_t>(i) + 1] * x + sys.B[static_cast<size_t>(i) + 1] * u;
  }
  return D;
}

Eigen::VectorXd d_offset(const ParametricSystem& sys, const Eigen::VectorXd& x_prev,
                         const Eigen::VectorXd& u_prev, const Eigen::VectorXd& x_now) {
  if (x_prev.size() != sys.n() || u_prev.size() != sys.m() || x_now.size() != sys.n()) {
    throw std::invalid_argument("d_offset: dimension mismatch");
  }
  return sys.A[0] * x_prev + sys.B[0] * u_prev - x_now;
}

ParametricSystem discretize_euler(const ParametricSystem& continuous, double Ts) {
  if (Ts < 0.0) throw std::invalid_argument("discretize_euler: negative sample time");
  continuous.validate();
  ParametricSystem d = continuous;
  d.A[0] = Eigen::MatrixXd::Identity(continuous.n(), continuous.n()) + Ts * continuous.A[0];
  for (size_t i = 1; i < d.A.size(); ++i) d.A[i] = Ts * continuous.A[i];
  for (size_t i = 0; i < d.B.size(); ++i) d.B[i] = Ts * continuous.B[i];
  return d;
}

}  // namespace rampc
