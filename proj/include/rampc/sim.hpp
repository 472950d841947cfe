#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampc/config.hpp"
#include "rampc/controller.hpp"
#include "rampc/estimation.hpp"
#include "rampc/quadrotor.hpp"
#include "rampc/synthesis.hpp"

namespace rampc {

/// True plant state in deviation-from-hover coordinates, plus the current
/// rotor efficiency.
struct PlantState {
  Eigen::VectorXd x_true;
  int k = 0;
  double gamma = 1.0;
};

/// Exact transition x+ = A(theta*) x + B(theta*) (gamma u_abs - u_eq) + w,
/// where u_eq is the absolute input holding the plant at hover so that the
/// efficiency scales the commanded thrust, not its deviation.
PlantState plant_step(const PlantState& s, const Eigen::VectorXd& u_abs,
                      const ParametricSystem& sys, const Eigen::VectorXd& theta_star,
                      const Eigen::VectorXd& u_eq, const Eigen::VectorXd& w);

inline Eigen::VectorXd measure(const PlantState& s, const Eigen::VectorXd& noise) {
  return s.x_true + noise;
}

/// Deterministic uniform sampler over a box. Identical seeds give bitwise
/// identical streams on every platform.
class BoxSampler {
 public:
  BoxSampler(std::uint64_t seed, Hyperbox box) : rng_(seed), box_(std::move(box)) {}

  Eigen::VectorXd next() {
    Eigen::VectorXd w(box_.dim());
    for (int i = 0; i < box_.dim(); ++i) {
      const double u01 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      w(i) = box_.lo(i) + u01 * (box_.hi(i) - box_.lo(i));
    }
    return w;
  }

 private:
  std::mt19937_64 rng_;
  Hyperbox box_;
};

/// Disturbance profiles: off (zeros), constant (a fixed fraction of the box
/// bound, sign per config) or uniform sampling inside the box.
class DisturbanceStream {
 public:
  DisturbanceStream(std::uint64_t seed, Hyperbox box, const std::string& profile,
                    double fraction, double direction);

  Eigen::VectorXd next();

 private:
  BoxSampler sampler_;
  Hyperbox box_;
  std::string profile_;
  Eigen::VectorXd constant_;
};

/// Step function: 1 before t_fail, gamma_after from t_fail onward.
std::function<double(int)> failure_schedule(int t_fail, double gamma_after);

struct StepRecord {
  int k = 0;
  double gamma = 1.0;
  bool feasible = true;
  bool falsified = false;
  Eigen::VectorXd ref;
  Eigen::VectorXd x_true;
  Eigen::VectorXd x_meas;
  Eigen::VectorXd u_cmd;   // absolute
  Eigen::VectorXd u_dev;   // applied deviation from the hover input
  double cost = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd theta_lo, theta_hi, theta_hat;
  double solve_ms = 0.0;  // per-step program only
  double step_ms = 0.0;   // identification + hover update + program
  double violation = 0.0;  // max constraint excess, <= 0 when satisfied
};

struct RunSummary {
  double max_violation = -1.0;
  bool containment_ok = true;
  double final_tracking_error = 0.0;
  double mean_solve_ms = 0.0;
  double median_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  double median_step_ms = 0.0;
  int infeasible_count = 0;
  int falsified_count = 0;
  double final_theta_lo = 0.0;
  double final_theta_hi = 0.0;
  bool aborted = false;
};

struct RunLog {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::vector<StepRecord> records;
  RunSummary summary;

  /// Hash of the deterministic record fields (solve times excluded).
  std::uint64_t hash() const;
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

/// Model, disturbance/noise boxes and weights assembled from a config.
struct ScenarioSetup {
  QuadrotorModel model;
  HPolytope W;
  HPolytope M;
  Hyperbox theta0;
  Eigen::MatrixXd Q, R;
  Eigen::VectorXd u_eq;  // true-plant hover input (absolute)
};

ScenarioSetup build_setup(const ScenarioConfig& config);

/// Full offline pipeline: gain/cost design, contractive polytope, tube
/// constants, validation. Throws SynthesisError if validation fails.
SynthesisArtifacts synthesize(const ScenarioConfig& config);

/// Deterministic closed loop: measure, identify, re-center, solve, step.
/// A pure function of (config, artifacts).
RunLog run_closed_loop(const ScenarioConfig& config, const SynthesisArtifacts& artifacts);

}  // namespace rampc
