#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rampc/lp.hpp"
#include "rampc/qp.hpp"

using namespace rampc;

namespace {

LinearProgram box_lp(const Eigen::VectorXd& objective) {
  const int n = static_cast<int>(objective.size());
  LinearProgram p;
  p.objective = objective;
  p.A.resize(2 * n, n);
  p.A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  p.b = Eigen::VectorXd::Ones(2 * n);
  return p;
}

}  // namespace

TEST_CASE("lp: support of the unit box") {
  Eigen::VectorXd c(2);
  c << 1.0, 0.0;
  const SolveReport r = lp_solve(box_lp(c));
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.solution(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lp: two active faces") {
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  const SolveReport r = lp_solve(box_lp(c));
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.solution(0) == doctest::Approx(1.0));
  CHECK(r.solution(1) == doctest::Approx(1.0));
}

TEST_CASE("lp: unbounded ray") {
  LinearProgram p;
  p.objective = Eigen::VectorXd::Ones(1);
  p.A.resize(1, 1);
  p.A << -1.0;
  p.b = Eigen::VectorXd::Zero(1);  // x >= 0 only
  CHECK(lp_solve(p).status == SolveStatus::Unbounded);
}

TEST_CASE("lp: infeasible strip") {
  LinearProgram p;
  p.objective = Eigen::VectorXd::Zero(1);
  p.A.resize(2, 1);
  p.A << 1.0, -1.0;
  p.b.resize(2);
  p.b << -1.0, -1.0;  // x <= -1 and x >= 1
  CHECK(lp_solve(p).status == SolveStatus::Infeasible);
}

TEST_CASE("lp: malformed dimensions rejected") {
  LinearProgram p;
  p.objective = Eigen::VectorXd::Ones(2);
  p.A = Eigen::MatrixXd::Ones(1, 3);
  p.b = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(lp_solve(p), std::invalid_argument);
}

TEST_CASE("lp: optimal solutions are feasible on random programs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = n + 1 + static_cast<int>(rng() % 6);
    LinearProgram p;
    p.objective.resize(n);
    for (int i = 0; i < n; ++i) p.objective(i) = unif(rng);
    p.A.resize(m + 2 * n, n);
    p.b.resize(m + 2 * n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.A(i, j) = unif(rng);
      p.b(i) = 0.5 + std::abs(unif(rng));
    }
    // box rows guarantee compactness
    p.A.bottomRows(2 * n) << Eigen::MatrixXd::Identity(n, n),
        -Eigen::MatrixXd::Identity(n, n);
    p.b.tail(2 * n).setConstant(10.0);

    const SolveReport r = lp_solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_residual <= 1e-8);
  }
}

TEST_CASE("lp: deterministic across repeat solves") {
  Eigen::VectorXd c(3);
  c << 0.3, -0.7, 0.2;
  const LinearProgram p = box_lp(c);
  const SolveReport a = lp_solve(p);
  const SolveReport b = lp_solve(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(a.objective == b.objective);
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("qp: active bound") {
  QuadraticProgram p;
  p.H = Eigen::MatrixXd::Constant(1, 1, 2.0);  // z^2
  p.g = Eigen::VectorXd::Zero(1);
  p.A = Eigen::MatrixXd::Identity(1, 1);
  p.l = Eigen::VectorXd::Ones(1);
  p.u = Eigen::VectorXd::Constant(1, 1e30);
  const SolveReport r = qp_solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.solution(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("qp: interior optimum") {
  QuadraticProgram p;
  p.H = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.g = Eigen::VectorXd::Zero(1);
  p.A = Eigen::MatrixXd::Identity(1, 1);
  p.l = Eigen::VectorXd::Constant(1, -1.0);
  p.u = Eigen::VectorXd::Ones(1);
  const SolveReport r = qp_solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.solution(0)) <= 1e-7);
  CHECK(std::abs(r.objective) <= 1e-7);
}

TEST_CASE("qp: empty feasible set detected") {
  QuadraticProgram p;
  p.H = Eigen::MatrixXd::Zero(1, 1);
  p.g = Eigen::VectorXd::Zero(1);
  p.A.resize(2, 1);
  p.A << 1.0, 1.0;
  p.l.resize(2);
  p.u.resize(2);
  p.l << -1e30, 1.0;   // z <= -1 and z >= 1
  p.u << -1.0, 1e30;
  CHECK(qp_solve(p).status == SolveStatus::Infeasible);
}

TEST_CASE("qp: unbounded objective detected") {
  QuadraticProgram p;
  p.H = Eigen::MatrixXd::Zero(1, 1);
  p.g = Eigen::VectorXd::Constant(1, -1.0);  // push z toward +inf
  p.A = Eigen::MatrixXd::Identity(1, 1);
  p.l = Eigen::VectorXd::Zero(1);
  p.u = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  CHECK(qp_solve(p).status == SolveStatus::Unbounded);
}

TEST_CASE("qp: input validation") {
  QuadraticProgram p;
  p.H.resize(2, 2);
  p.H << 1.0, 0.5, -0.5, 1.0;  // not symmetric
  p.g = Eigen::VectorXd::Zero(2);
  p.A = Eigen::MatrixXd::Identity(2, 2);
  p.l = Eigen::VectorXd::Constant(2, -1.0);
  p.u = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(qp_solve(p), std::invalid_argument);

  p.H << 1.0, 0.0, 0.0, -1.0;  // indefinite
  CHECK_THROWS_AS(qp_solve(p), std::invalid_argument);

  p.H.setIdentity();
  p.l(0) = 2.0;  // l > u
  CHECK_THROWS_AS(qp_solve(p), std::invalid_argument);
}

TEST_CASE("qp: no sampled feasible point beats the reported optimum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd root(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) root(i, j) = unif(rng);
    QuadraticProgram p;
    p.H = root.transpose() * root + 0.1 * Eigen::MatrixXd::Identity(n, n);
    p.g.resize(n);
    for (int i = 0; i < n; ++i) p.g(i) = unif(rng);
    p.A = Eigen::MatrixXd::Identity(n, n);
    p.l = Eigen::VectorXd::Constant(n, -1.0);
    p.u = Eigen::VectorXd::Ones(n);

    const SolveReport r = qp_solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_residual <= 1e-6);
    CHECK(r.dual_residual <= 1e-6);
    for (int s = 0; s < 50; ++s) {
      Eigen::VectorXd z(n);
      for (int i = 0; i < n; ++i) z(i) = unif(rng);
      const double obj = 0.5 * z.dot(p.H * z) + p.g.dot(z);
      CHECK(r.objective <= obj + 1e-6);
    }
  }
}

TEST_CASE("qp: warm start is deterministic and agrees with cold start") {
  QuadraticProgram p;
  p.H.resize(2, 2);
  p.H << 2.0, 0.0, 0.0, 2.0;
  p.g.resize(2);
  p.g << -1.0, 1.0;
  p.A = Eigen::MatrixXd::Identity(2, 2);
  p.l = Eigen::VectorXd::Constant(2, -0.25);
  p.u = Eigen::VectorXd::Constant(2, 0.25);

  const SolveReport cold = qp_solve(p);
  Eigen::VectorXd w(2);
  w << 0.2, -0.2;
  const SolveReport warm1 = qp_solve(p, w);
  const SolveReport warm2 = qp_solve(p, w);
  REQUIRE(cold.status == SolveStatus::Optimal);
  REQUIRE(warm1.status == SolveStatus::Optimal);
  CHECK((warm1.solution - cold.solution).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((warm1.solution - warm2.solution).cwiseAbs().maxCoeff() == 0.0);
  CHECK(warm1.iterations == warm2.iterations);
}
