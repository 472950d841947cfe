#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampc/quadrotor.hpp"

namespace rampc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One closed-loop scenario: model selection, uncertainty description,
/// controller flags, reference schedule and run parameters. Loads from a
/// JSON file; round-trips exactly.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string model = "altitude-2";  // or "direct-12"

  double true_mass = 0.028;     // plant-side mass, theta* = 1/mass
  double mass_lo = 0.027;       // parameter set: theta in [1/mass_hi, 1/mass_lo]
  double mass_hi = 0.037;
  double theta0_lo_scale = 1.0;  // extra scaling of the lower endpoint
                                 // (failure scenarios widen it by gamma_min)

  double wind_speed = 2.0;      // m/s, sizes the disturbance box
  double drag_coeff = 9.57e-4;  // kg/s

  struct Wind {
    std::string profile = "constant";  // off | constant | uniform
    double fraction = 1.0;             // of the box bound (constant profile)
    double direction = 1.0;            // sign of the constant disturbance
  } wind;

  struct Noise {
    bool enabled = false;
    double pos = 0.001;   // m
    double vel = 0.01;    // m/s
    bool dilation = true; // noise-robust non-falsified sets
  } noise;

  Eigen::VectorXd Q_diag;  // sized to the model when empty
  Eigen::VectorXd R_diag;
  int N = 10;
  double lambda = 0.9;
  int max_rows = 200;

  std::string mode = "adaptive";  // adaptive | robust-baseline
  bool ss_update = true;
  bool robustify_ss = false;
  double baseline_mass = 0.037;

  struct Failure {
    bool enabled = false;
    int t_fail = 0;
    double gamma = 1.0;
    bool dilate = false;
    double factor = 0.7;
    bool use_printed_min = false;
  } failure;

  /// Piecewise-constant position references: value holds one setpoint per
  /// position axis and applies from `step` onward.
  struct RefStep {
    int step = 0;
    std::vector<double> value;
  };
  std::vector<RefStep> references;

  int run_length = 50;
  std::uint64_t seed = 1;
  std::string on_falsified = "abort";     // abort | continue
  std::string on_infeasible = "continue"; // abort | continue

  QuadrotorParams quad() const;
  double theta_star() const { return 1.0 / true_mass; }
  double theta0_lo() const { return theta0_lo_scale / mass_hi; }
  double theta0_hi() const { return 1.0 / mass_lo; }

  /// Throws ConfigError on invariant violations.
  void validate() const;

  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::string& path);

  /// FNV-1a over the canonical serialization.
  std::string content_hash() const;

  /// Hash over the fields the offline synthesis depends on; run-time
  /// parameters (seed, references, run length, failure timing) do not
  /// invalidate cached artifacts.
  std::string synthesis_hash() const;
};

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace rampc
