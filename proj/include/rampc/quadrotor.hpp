#pragma once

#include <array>

#include "rampc/model.hpp"
#include "rampc/polytope.hpp"

namespace rampc {

/// Airframe constants. Defaults are small-quadrotor scale: X configuration
/// with 0.0325 m arm half-spacing, alternating torque-to-thrust signs.
struct QuadrotorParams {
  std::array<double, 4> rotor_x{0.0325, -0.0325, -0.0325, 0.0325};
  std::array<double, 4> rotor_y{0.0325, 0.0325, -0.0325, -0.0325};
  std::array<double, 4> torque_coeff{0.00596, -0.00596, 0.00596, -0.00596};
  double gravity = 9.81;
  Eigen::Vector3d inertia{1.4e-5, 1.4e-5, 2.2e-5};
  double mass = 0.028;
  double thrust_min = 0.0;
  double thrust_max = 0.16;
  double Ts = 0.1;

  // operating envelope used to bound the seed polytope and size constraints
  double position_bound = 0.7;       // m, per axis
  double angle_bound = 1.5707963267948966;  // rad
  double velocity_bound = 2.0;       // m/s, direct model only
  double rate_bound = 10.0;          // rad/s, direct model only
};

/// Per-rotor hover thrusts solving the geometry balance for the given mass:
/// total lift m g, zero net roll/pitch/yaw torque.
Eigen::Vector4d steady_state_input(const QuadrotorParams& q, double mass);

/// A model bundle: discrete parametric dynamics (theta = 1/mass), joint
/// constraints in deviation coordinates, and the bookkeeping constants the
/// closed loop needs.
struct QuadrotorModel {
  ParametricSystem sys;
  ConstraintSet Z;
  /// B(theta) u_hover(1/theta), which is theta-independent: the successor
  /// correction that lets transitions be regressed on absolute rotor
  /// commands.
  Eigen::VectorXd grav_feedforward;
  /// Deviation-input box valid for every hover input over the parameter
  /// range (used for the G rows and feasibility checks).
  Eigen::VectorXd u_dev_lo, u_dev_hi;
  /// Index of the first position state and count of position states.
  int pos_count = 0;
  int vel_offset = 0;
  bool direct = false;  // 12-state direct-thrust model vs 2-state altitude
};

/// 12-state / 4-input hover linearization, Euler-discretized. States are
/// (position, velocity, roll-pitch-yaw, body rates); theta = 1/mass enters
/// only the vertical acceleration row.
QuadrotorModel quadrotor_direct_model(const QuadrotorParams& q, double theta_lo,
                                      double theta_hi);

/// 2-state / 1-input vertical channel (position, velocity; input is total
/// thrust deviation).
QuadrotorModel quadrotor_altitude_model(const QuadrotorParams& q, double theta_lo,
                                        double theta_hi);

/// Additive disturbance box from a constant-wind bound: per-step velocity
/// kick Ts * (drag/mass) * wind_speed on each translational axis, with the
/// matching half-Ts^2 position term. Zero on all other states.
Hyperbox wind_disturbance_box(const QuadrotorModel& model, const QuadrotorParams& q,
                              double wind_speed, double drag_coeff);

/// Measurement-noise box: per-axis bounds on positions and velocities, zero
/// elsewhere.
Hyperbox measurement_noise_box(const QuadrotorModel& model, double pos_bound,
                               double vel_bound);

}  // namespace rampc
