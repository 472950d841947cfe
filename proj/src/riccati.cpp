#include "rampc/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <stdexcept>

namespace rampc {

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  for (int k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (std::abs(lam) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh << A.cast<std::complex<double>>() - lam * Eigen::MatrixXcd::Identity(n, n),
        B.cast<std::complex<double>>();
    if (pbh.fullPivLu().rank() < n) return false;
  }
  return true;
}

Eigen::MatrixXd dare_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw std::invalid_argument("dare_solve: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> R_llt(R);
  if (R_llt.info() != Eigen::Success) {
    throw std::invalid_argument("dare_solve: R must be positive definite");
  }
  if (!is_stabilizable(A, B)) {
    throw std::invalid_argument("dare_solve: (A, B) not stabilizable");
  }

  // Doubling iteration: A_{k+1} = A_k (I + G_k H_k)^{-1} A_k and the paired
  // updates of G (controllability-like) and H (the Riccati iterate).
  Eigen::MatrixXd A_k = A;
  Eigen::MatrixXd G_k = B * R_llt.solve(B.transpose());
  Eigen::MatrixXd H_prev;
  Eigen::MatrixXd H = Q;

  for (int iter = 0; iter < 200; ++iter) {
    H_prev = H;
    const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n) + G_k * H;
    Eigen::PartialPivLU<Eigen::MatrixXd> W_lu(W);
    const Eigen::MatrixXd V1 = W_lu.solve(A_k);
    const Eigen::MatrixXd V2 = W_lu.solve(G_k.transpose()).transpose();
    G_k += A_k * V2 * A_k.transpose();
    H = H_prev + V1.transpose() * H_prev * A_k;
    A_k *= V1;
    if ((H - H_prev).norm() <= 1e-13 * std::max(1.0, H.norm())) {
      return 0.5 * (H + H.transpose());  // symmetrize round-off
    }
  }
  throw std::runtime_error("dare_solve: doubling iteration did not converge");
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& P, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return -S.ldlt().solve(B.transpose() * P * A);
}

}  // namespace rampc
