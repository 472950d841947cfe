#include "rampc/quadrotor.hpp"

#include <Eigen/LU>
#include <stdexcept>

namespace rampc {

namespace {

Eigen::Matrix4d geometry_matrix(const QuadrotorParams& q) {
  Eigen::Matrix4d M;
  for (int i = 0; i < 4; ++i) {
    M(0, i) = 1.0;
    M(1, i) = q.rotor_y[static_cast<size_t>(i)];
    M(2, i) = -q.rotor_x[static_cast<size_t>(i)];
    M(3, i) = q.torque_coeff[static_cast<size_t>(i)];
  }
  return M;
}

// Deviation-input box that stays valid however the hover input is re-centred
// within the parameter range: the tightest bound over masses in
// [1/theta_hi, 1/theta_lo].
void input_deviation_bounds(const QuadrotorParams& q, double theta_lo, double theta_hi,
                            int n_inputs, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  if (!(theta_lo > 0.0 && theta_hi >= theta_lo)) {
    throw std::invalid_argument("quadrotor model: parameter interval must be positive");
  }
  const double m_lo = 1.0 / theta_hi;
  const double m_hi = 1.0 / theta_lo;
  lo.resize(n_inputs);
  hi.resize(n_inputs);
  if (n_inputs == 4) {
    const Eigen::Vector4d f_lo = steady_state_input(q, m_lo);
    const Eigen::Vector4d f_hi = steady_state_input(q, m_hi);
    for (int i = 0; i < 4; ++i) {
      lo(i) = q.thrust_min - f_lo(i);
      hi(i) = q.thrust_max - f_hi(i);
    }
  } else {
    lo(0) = 4.0 * q.thrust_min - m_lo * q.gravity;
    hi(0) = 4.0 * q.thrust_max - m_hi * q.gravity;
  }
  if ((hi - lo).minCoeff() <= 0.0 || lo.maxCoeff() >= 0.0 || hi.minCoeff() <= 0.0) {
    throw std::invalid_argument(
        "quadrotor model: hover inputs leave no symmetric-deviation margin");
  }
}

void append_state_box_rows(Eigen::MatrixXd& F, int& row, int index, double bound) {
  F(row, index) = 1.0 / bound;
  F(row + 1, index) = -1.0 / bound;
  row += 2;
}

}  // namespace

Eigen::Vector4d steady_state_input(const QuadrotorParams& q, double mass) {
  const Eigen::Matrix4d M = geometry_matrix(q);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("steady_state_input: rotor geometry matrix is singular");
  }
  Eigen::Vector4d rhs;
  rhs << mass * q.gravity, 0.0, 0.0, 0.0;
  return lu.solve(rhs);
}

QuadrotorModel quadrotor_direct_model(const QuadrotorParams& q, double theta_lo,
                                      double theta_hi) {
  constexpr int n = 12;
  constexpr int m = 4;
  const double g = q.gravity;

  // Continuous-time affine components; theta = 1/mass multiplies only the
  // collective-thrust row of B.
  Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(n, n);
  A0.block(0, 3, 3, 3).setIdentity();   // position integrates velocity
  A0(3, 7) = g;                         // pitch tilts forward acceleration
  A0(4, 6) = -g;                        // roll tilts sideways acceleration
  A0.block(6, 9, 3, 3).setIdentity();   // angles integrate body rates

  Eigen::MatrixXd B0 = Eigen::MatrixXd::Zero(n, m);
  for (int i = 0; i < m; ++i) {
    B0(9, i) = q.rotor_y[static_cast<size_t>(i)] / q.inertia(0);
    B0(10, i) = -q.rotor_x[static_cast<size_t>(i)] / q.inertia(1);
    B0(11, i) = q.torque_coeff[static_cast<size_t>(i)] / q.inertia(2);
  }

  Eigen::MatrixXd A1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B1 = Eigen::MatrixXd::Zero(n, m);
  B1.row(5).setOnes();  // vertical acceleration = theta * sum of thrusts

  ParametricSystem cont;
  cont.A = {A0, A1};
  cont.B = {B0, B1};

  QuadrotorModel model;
  model.sys = discretize_euler(cont, q.Ts);
  model.direct = true;
  model.pos_count = 3;
  model.vel_offset = 3;

  input_deviation_bounds(q, theta_lo, theta_hi, m, model.u_dev_lo, model.u_dev_hi);

  // Constraint rows: position, velocity, angle and rate boxes plus per-rotor
  // thrust deviations. Velocity/rate boxes keep the seed polytope compact.
  const int nz = 2 * (3 + 3 + 3 + 3) + 2 * m;
  model.Z.F = Eigen::MatrixXd::Zero(nz, n);
  model.Z.G = Eigen::MatrixXd::Zero(nz, m);
  int row = 0;
  for (int i = 0; i < 3; ++i) append_state_box_rows(model.Z.F, row, i, q.position_bound);
  for (int i = 0; i < 3; ++i) append_state_box_rows(model.Z.F, row, 3 + i, q.velocity_bound);
  for (int i = 0; i < 3; ++i) append_state_box_rows(model.Z.F, row, 6 + i, q.angle_bound);
  for (int i = 0; i < 3; ++i) append_state_box_rows(model.Z.F, row, 9 + i, q.rate_bound);
  for (int i = 0; i < m; ++i) {
    model.Z.G(row, i) = 1.0 / model.u_dev_hi(i);
    model.Z.G(row + 1, i) = 1.0 / model.u_dev_lo(i);  // u_dev_lo < 0
    row += 2;
  }

  model.grav_feedforward = Eigen::VectorXd::Zero(n);
  model.grav_feedforward(5) = q.Ts * g;
  return model;
}

QuadrotorModel quadrotor_altitude_model(const QuadrotorParams& q, double theta_lo,
                                        double theta_hi) {
  constexpr int n = 2;
  constexpr int m = 1;

  Eigen::MatrixXd A0(n, n), A1 = Eigen::MatrixXd::Zero(n, n);
  A0 << 0.0, 1.0, 0.0, 0.0;
  Eigen::MatrixXd B0 = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd B1(n, m);
  B1 << 0.0, 1.0;

  ParametricSystem cont;
  cont.A = {A0, A1};
  cont.B = {B0, B1};

  QuadrotorModel model;
  model.sys = discretize_euler(cont, q.Ts);
  model.direct = false;
  model.pos_count = 1;
  model.vel_offset = 1;

  input_deviation_bounds(q, theta_lo, theta_hi, m, model.u_dev_lo, model.u_dev_hi);

  model.Z.F = Eigen::MatrixXd::Zero(4, n);
  model.Z.G = Eigen::MatrixXd::Zero(4, m);
  model.Z.F(0, 0) = 1.0 / q.position_bound;
  model.Z.F(1, 0) = -1.0 / q.position_bound;
  model.Z.G(2, 0) = 1.0 / model.u_dev_hi(0);
  model.Z.G(3, 0) = 1.0 / model.u_dev_lo(0);

  model.grav_feedforward = Eigen::VectorXd::Zero(n);
  model.grav_feedforward(1) = q.Ts * q.gravity;
  return model;
}

Hyperbox wind_disturbance_box(const QuadrotorModel& model, const QuadrotorParams& q,
                              double wind_speed, double drag_coeff) {
  const int n = model.sys.n();
  Eigen::VectorXd half = Eigen::VectorXd::Zero(n);
  const double accel = drag_coeff / q.mass * wind_speed;
  if (model.direct) {
    for (int i = 0; i < 3; ++i) {
      half(i) = 0.5 * q.Ts * q.Ts * accel;
      half(3 + i) = q.Ts * accel;
    }
  } else {
    half(0) = 0.5 * q.Ts * q.Ts * accel;
    half(1) = q.Ts * accel;
  }
  return Hyperbox::bounds(-half, half);
}

Hyperbox measurement_noise_box(const QuadrotorModel& model, double pos_bound,
                               double vel_bound) {
  const int n = model.sys.n();
  Eigen::VectorXd half = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < model.pos_count; ++i) {
    half(i) = pos_bound;
    half(model.vel_offset + i) = vel_bound;
  }
  return Hyperbox::bounds(-half, half);
}

}  // namespace rampc
