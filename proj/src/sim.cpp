#include "rampc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

namespace rampc {

PlantState plant_step(const PlantState& s, const Eigen::VectorXd& u_abs,
                      const ParametricSystem& sys, const Eigen::VectorXd& theta_star,
                      const Eigen::VectorXd& u_eq, const Eigen::VectorXd& w) {
  const auto [A, B] = eval_system(sys, theta_star);
  PlantState next = s;
  next.x_true = A * s.x_true + B * (s.gamma * u_abs - u_eq) + w;
  next.k = s.k + 1;
  return next;
}

DisturbanceStream::DisturbanceStream(std::uint64_t seed, Hyperbox box,
                                     const std::string& profile, double fraction,
                                     double direction)
    : sampler_(seed, box), box_(box), profile_(profile) {
  constant_.resize(box_.dim());
  for (int i = 0; i < box_.dim(); ++i) {
    constant_(i) = fraction * (direction >= 0.0 ? box_.hi(i) : box_.lo(i));
  }
}

Eigen::VectorXd DisturbanceStream::next() {
  if (profile_ == "off") return Eigen::VectorXd::Zero(box_.dim());
  if (profile_ == "constant") return constant_;
  return sampler_.next();
}

std::function<double(int)> failure_schedule(int t_fail, double gamma_after) {
  return [t_fail, gamma_after](int k) { return k < t_fail ? 1.0 : gamma_after; };
}

namespace {

void hash_vector(std::uint64_t& h, const Eigen::VectorXd& v) {
  if (v.size()) h = fnv1a(v.data(), static_cast<size_t>(v.size()) * sizeof(double), h);
}

Eigen::MatrixXd diag_or_default(const Eigen::VectorXd& d, const Eigen::VectorXd& fallback) {
  const Eigen::VectorXd& use = d.size() ? d : fallback;
  return use.asDiagonal().toDenseMatrix();
}

Eigen::VectorXd reference_state(const ScenarioConfig& cfg, const QuadrotorModel& model,
                                int k) {
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(model.sys.n());
  const ScenarioConfig::RefStep* active = nullptr;
  for (const auto& r : cfg.references) {
    if (r.step <= k && (!active || r.step >= active->step)) active = &r;
  }
  if (active) {
    for (int i = 0; i < model.pos_count; ++i) {
      ref(i) = active->value[static_cast<size_t>(i)];
    }
  }
  return ref;
}

double physical_violation(const QuadrotorModel& model, const QuadrotorParams& q,
                          const Eigen::VectorXd& x_true, const Eigen::VectorXd& ref,
                          const Eigen::VectorXd& u_cmd) {
  double v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.pos_count; ++i) {
    v = std::max(v, std::abs(x_true(i) - ref(i)) - q.position_bound);
  }
  if (model.direct) {
    for (int i = 0; i < 3; ++i) {
      v = std::max(v, std::abs(x_true(3 + i)) - q.velocity_bound);
      v = std::max(v, std::abs(x_true(6 + i)) - q.angle_bound);
      v = std::max(v, std::abs(x_true(9 + i)) - q.rate_bound);
    }
    for (int i = 0; i < 4; ++i) {
      v = std::max(v, u_cmd(i) - q.thrust_max);
      v = std::max(v, q.thrust_min - u_cmd(i));
    }
  } else {
    v = std::max(v, u_cmd(0) - 4.0 * q.thrust_max);
    v = std::max(v, 4.0 * q.thrust_min - u_cmd(0));
  }
  return v;
}

}  // namespace

std::uint64_t RunLog::hash() const {
  std::uint64_t h = fnv1a(scenario_name.data(), scenario_name.size());
  h = fnv1a(&seed, sizeof(seed), h);
  for (const auto& r : records) {
    h = fnv1a(&r.k, sizeof(r.k), h);
    h = fnv1a(&r.gamma, sizeof(r.gamma), h);
    const unsigned char flags =
        static_cast<unsigned char>((r.feasible ? 1 : 0) | (r.falsified ? 2 : 0));
    h = fnv1a(&flags, 1, h);
    hash_vector(h, r.ref);
    hash_vector(h, r.x_true);
    hash_vector(h, r.x_meas);
    hash_vector(h, r.u_cmd);
    hash_vector(h, r.u_dev);
    h = fnv1a(&r.cost, sizeof(double), h);
    hash_vector(h, r.alpha);
    hash_vector(h, r.theta_lo);
    hash_vector(h, r.theta_hi);
    hash_vector(h, r.theta_hat);
  }
  return h;
}

void RunLog::write_csv(std::ostream& os) const {
  if (records.empty()) return;
  const auto& first = records.front();
  os.precision(17);
  os << "k,gamma,feasible,falsified,cost,solve_ms,violation";
  auto header_block = [&](const char* base, const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) os << ',' << base << i;
  };
  header_block("ref", first.ref);
  header_block("x", first.x_true);
  header_block("xm", first.x_meas);
  header_block("u", first.u_cmd);
  header_block("udev", first.u_dev);
  header_block("theta_lo", first.theta_lo);
  header_block("theta_hi", first.theta_hi);
  header_block("theta_hat", first.theta_hat);
  os << ",alpha_first,alpha_last\n";

  for (const auto& r : records) {
    os << r.k << ',' << r.gamma << ',' << (r.feasible ? 1 : 0) << ','
       << (r.falsified ? 1 : 0) << ',' << r.cost << ',' << r.solve_ms << ','
       << r.violation;
    auto block = [&](const Eigen::VectorXd& v) {
      for (int i = 0; i < v.size(); ++i) os << ',' << v(i);
    };
    block(r.ref);
    block(r.x_true);
    block(r.x_meas);
    block(r.u_cmd);
    block(r.u_dev);
    block(r.theta_lo);
    block(r.theta_hi);
    block(r.theta_hat);
    os << ',' << (r.alpha.size() ? r.alpha(1) : 0.0) << ','
       << (r.alpha.size() ? r.alpha(r.alpha.size() - 1) : 0.0) << '\n';
  }
}

nlohmann::json RunLog::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["hash"] = hash();
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["steps"] = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json s;
    s["k"] = r.k;
    s["gamma"] = r.gamma;
    s["feasible"] = r.feasible;
    s["falsified"] = r.falsified;
    s["ref"] = vec(r.ref);
    s["x_true"] = vec(r.x_true);
    s["x_meas"] = vec(r.x_meas);
    s["u_cmd"] = vec(r.u_cmd);
    s["u_dev"] = vec(r.u_dev);
    s["cost"] = r.cost;
    s["alpha"] = vec(r.alpha);
    s["theta_lo"] = vec(r.theta_lo);
    s["theta_hi"] = vec(r.theta_hi);
    s["theta_hat"] = vec(r.theta_hat);
    s["solve_ms"] = r.solve_ms;
    s["step_ms"] = r.step_ms;
    s["violation"] = r.violation;
    j["steps"].push_back(s);
  }
  nlohmann::json sm;
  sm["max_violation"] = summary.max_violation;
  sm["containment_ok"] = summary.containment_ok;
  sm["final_tracking_error"] = summary.final_tracking_error;
  sm["mean_solve_ms"] = summary.mean_solve_ms;
  sm["median_solve_ms"] = summary.median_solve_ms;
  sm["max_solve_ms"] = summary.max_solve_ms;
  sm["median_step_ms"] = summary.median_step_ms;
  sm["infeasible_count"] = summary.infeasible_count;
  sm["falsified_count"] = summary.falsified_count;
  sm["final_theta_lo"] = summary.final_theta_lo;
  sm["final_theta_hi"] = summary.final_theta_hi;
  sm["aborted"] = summary.aborted;
  j["summary"] = sm;
  return j;
}

ScenarioSetup build_setup(const ScenarioConfig& config) {
  config.validate();
  const QuadrotorParams q = config.quad();
  ScenarioSetup s{};
  if (config.model == "direct-12") {
    s.model = quadrotor_direct_model(q, config.theta0_lo(), config.theta0_hi());
    Eigen::VectorXd qd(12);
    qd << 10, 10, 100, 1, 1, 1, 2, 2, 30, 1, 1, 1;
    qd /= 100.0;
    s.Q = diag_or_default(config.Q_diag, qd);
    s.R = diag_or_default(config.R_diag, Eigen::VectorXd::Constant(4, 0.01));
    s.u_eq = steady_state_input(q, q.mass);
  } else {
    s.model = quadrotor_altitude_model(q, config.theta0_lo(), config.theta0_hi());
    Eigen::VectorXd qd(2);
    qd << 1.0, 0.01;
    s.Q = diag_or_default(config.Q_diag, qd);
    s.R = diag_or_default(config.R_diag, Eigen::VectorXd::Constant(1, 0.01));
    s.u_eq = Eigen::VectorXd::Constant(1, q.mass * q.gravity);
  }
  const Hyperbox wind = wind_disturbance_box(s.model, q, config.wind_speed, config.drag_coeff);
  s.W = wind.as_polytope();
  const Hyperbox noise = config.noise.enabled
                             ? measurement_noise_box(s.model, config.noise.pos, config.noise.vel)
                             : measurement_noise_box(s.model, 0.0, 0.0);
  s.M = noise.as_polytope();
  Eigen::VectorXd lo(1), hi(1);
  lo(0) = config.theta0_lo();
  hi(0) = config.theta0_hi();
  s.theta0 = Hyperbox::bounds(lo, hi);
  return s;
}

SynthesisArtifacts synthesize(const ScenarioConfig& config) {
  const ScenarioSetup s = build_setup(config);
  const auto [K, P] = design_gain_and_cost(s.model.sys, s.theta0, s.Q, s.R);
  const auto vertices = box_vertices(s.theta0);
  const HPolytope X0 =
      build_contractive(s.model.Z, s.model.sys, K, vertices, config.lambda, config.max_rows);
  const auto [c, w_bar] = tube_constants(X0, s.model.Z, K, s.W);

  SynthesisArtifacts a;
  a.K = K;
  a.P = P;
  a.X0 = X0;
  a.lambda = config.lambda;
  a.c = c;
  a.w_bar = w_bar;
  a.Q = s.Q;
  a.R = s.R;
  a.N = config.N;
  a.F = s.model.Z.F;
  a.G = s.model.Z.G;
  a.config_hash = config.synthesis_hash();

  if (config.robustify_ss) {
    // hover-input error of applying the set-center estimate instead of the
    // candidate true parameter
    const QuadrotorParams q = config.quad();
    const double theta_applied = s.theta0.center()(0);
    const int m = s.model.sys.m();
    a.u_tilde = steady_state_robustification(
        s.model.sys, s.theta0, X0, [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
          if (m == 4) {
            return steady_state_input(q, 1.0 / theta_applied) -
                   steady_state_input(q, 1.0 / th(0));
          }
          Eigen::VectorXd e(1);
          e(0) = q.gravity / theta_applied - q.gravity / th(0);
          return e;
        });
  } else {
    a.u_tilde.resize(0);
  }

  const ValidationReport rep = validate_artifacts(a, s.model.sys, s.theta0, s.W);
  if (!rep.pass) {
    std::string msg = "synthesize: validation failed:";
    for (const auto& f : rep.failures) msg += " [" + f + "]";
    throw SynthesisError(msg);
  }
  return a;
}

RunLog run_closed_loop(const ScenarioConfig& config, const SynthesisArtifacts& artifacts) {
  const ScenarioSetup setup = build_setup(config);
  const QuadrotorParams q = config.quad();
  const ParametricSystem& sys = setup.model.sys;
  const int n = sys.n();
  const int m = sys.m();

  ControllerConfig cfg;
  cfg.N = config.N;
  cfg.artifacts = artifacts;
  cfg.mode = config.mode == "robust-baseline" ? ControlMode::RobustBaseline
                                              : ControlMode::Adaptive;
  cfg.ss_update = config.ss_update;
  cfg.robustify_ss = config.robustify_ss;
  cfg.baseline_theta = Eigen::VectorXd::Constant(1, 1.0 / config.baseline_mass);
  cfg.normalize();

  // Step-size bound from the operating envelope in absolute-input terms.
  Eigen::VectorXd x_bound(n), u_bound(m);
  if (setup.model.direct) {
    x_bound << Eigen::VectorXd::Constant(3, q.position_bound),
        Eigen::VectorXd::Constant(3, q.velocity_bound),
        Eigen::VectorXd::Constant(3, q.angle_bound),
        Eigen::VectorXd::Constant(3, q.rate_bound);
    u_bound.setConstant(q.thrust_max);
  } else {
    x_bound << q.position_bound, q.velocity_bound;
    u_bound.setConstant(4.0 * q.thrust_max);
  }
  const double mu = default_lms_gain(sys, x_bound, u_bound);
  EstimatorState est = EstimatorState::initial(setup.theta0, mu);
  if (cfg.mode == ControlMode::RobustBaseline) {
    // the frozen assumption drives the cost estimate as well
    est.theta_hat =
        cfg.baseline_theta.cwiseMax(est.theta_set.lo).cwiseMin(est.theta_set.hi);
  }

  const Hyperbox W_box = wind_disturbance_box(setup.model, q, config.wind_speed,
                                              config.drag_coeff);
  DisturbanceStream wind(config.seed, W_box, config.wind.profile, config.wind.fraction,
                         config.wind.direction);
  const Hyperbox M_box = config.noise.enabled
                             ? measurement_noise_box(setup.model, config.noise.pos,
                                                     config.noise.vel)
                             : measurement_noise_box(setup.model, 0.0, 0.0);
  BoxSampler noise(config.seed ^ 0x9E3779B97F4A7C15ULL, M_box);
  const auto gamma_of = config.failure.enabled
                            ? failure_schedule(config.failure.t_fail, config.failure.gamma)
                            : failure_schedule(config.run_length + 1, 1.0);

  Eigen::VectorXd theta_star(1);
  theta_star(0) = config.theta_star();

  PlantState plant;
  plant.x_true = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd u_ss_app = update_steady_state(cfg, est, q);

  RunLog log;
  log.scenario_name = config.name;
  log.seed = config.seed;
  log.summary.max_violation = -std::numeric_limits<double>::infinity();

  bool have_prev = false;
  Eigen::VectorXd x_meas_prev, u_cmd_prev;
  std::optional<TubeSolution> prev_sol;
  std::optional<Eigen::VectorXd> warm;
  bool containment_ok = true;

  for (int k = 0; k < config.run_length; ++k) {
    plant.gamma = gamma_of(k);
    const Eigen::VectorXd ref = reference_state(config, setup.model, k);
    const Eigen::VectorXd noise_k = config.noise.enabled
                                        ? noise.next()
                                        : Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd x_meas = measure(plant, noise_k);

    StepRecord rec;
    rec.k = k;
    rec.gamma = plant.gamma;
    rec.ref = ref;

    const auto step_t0 = std::chrono::steady_clock::now();
    if (cfg.mode == ControlMode::Adaptive && have_prev) {
      // Transitions are regressed on absolute commands with the hover
      // feedforward folded into the successor, which keeps the regression
      // exact regardless of the current hover-input estimate.
      const Eigen::VectorXd x_eff = x_meas + setup.model.grav_feedforward;
      const Eigen::MatrixXd D = d_matrix(sys, x_meas_prev, u_cmd_prev);
      const Eigen::VectorXd d = d_offset(sys, x_meas_prev, u_cmd_prev, x_eff);
      try {
        const HPolytope delta =
            (config.noise.enabled && config.noise.dilation)
                ? nonfalsified_halfspaces_noisy(D, d, setup.W, setup.M, est.theta_set, sys)
                : nonfalsified_halfspaces(D, d, setup.W);
        est = update_theta_set(est, delta);
      } catch (const ModelFalsifiedError&) {
        rec.falsified = true;
        ++log.summary.falsified_count;
        if (config.on_falsified == "abort") {
          log.summary.aborted = true;
        }
      }
      if (config.failure.dilate) {
        est = dilate_lower_bound(est, config.failure.factor, config.theta0_lo(),
                                 config.failure.use_printed_min);
      }
      est = update_point_estimate(est, D, x_meas_prev, u_cmd_prev,
                                  x_meas + setup.model.grav_feedforward, sys);
      if (cfg.ss_update) u_ss_app = update_steady_state(cfg, est, q);
    }

    const Eigen::VectorXd x_qp = reference_shift(x_meas, ref);
    Eigen::VectorXd u_dev(m);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const TubeSolution sol = solve_step(x_qp, est, cfg, sys, warm);
      u_dev = sol.u0;
      rec.cost = sol.cost;
      rec.alpha = sol.alpha;
      warm = sol.report.solution;
      prev_sol = sol;
    } catch (const InfeasibleStepError&) {
      rec.feasible = false;
      ++log.summary.infeasible_count;
      // fall back to the previous plan shifted by one step
      Eigen::VectorXd v_fb = Eigen::VectorXd::Zero(m);
      if (prev_sol && prev_sol->v.cols() > 1) v_fb = prev_sol->v.col(1);
      u_dev = artifacts.K * x_qp + v_fb;
      rec.cost = std::numeric_limits<double>::quiet_NaN();
      rec.alpha = Eigen::VectorXd::Zero(cfg.N + 1);
      if (config.on_infeasible == "abort") log.summary.aborted = true;
    }
    const auto step_t1 = std::chrono::steady_clock::now();
    rec.solve_ms = std::chrono::duration<double, std::milli>(step_t1 - t0).count();
    rec.step_ms = std::chrono::duration<double, std::milli>(step_t1 - step_t0).count();

    Eigen::VectorXd u_cmd = u_ss_app + u_dev;
    if (!rec.feasible) {
      // keep the fallback physically realizable
      const double cap = setup.model.direct ? q.thrust_max : 4.0 * q.thrust_max;
      const double floor_v = setup.model.direct ? q.thrust_min : 4.0 * q.thrust_min;
      u_cmd = u_cmd.cwiseMax(floor_v).cwiseMin(cap);
      u_dev = u_cmd - u_ss_app;
    }

    rec.x_true = plant.x_true;
    rec.x_meas = x_meas;
    rec.u_cmd = u_cmd;
    rec.u_dev = u_dev;
    rec.theta_lo = est.theta_set.lo;
    rec.theta_hi = est.theta_set.hi;
    rec.theta_hat = est.theta_hat;
    rec.violation = physical_violation(setup.model, q, plant.x_true, ref, u_cmd);

    const double theta_eff = plant.gamma * theta_star(0);
    if (theta_eff < est.theta_set.lo(0) - 1e-7 ||
        theta_eff > est.theta_set.hi(0) + 1e-7) {
      containment_ok = false;
    }

    log.records.push_back(rec);
    log.summary.max_violation = std::max(log.summary.max_violation, rec.violation);

    if (log.summary.aborted) break;

    const Eigen::VectorXd w = wind.next();
    plant = plant_step(plant, u_cmd, sys, theta_star, setup.u_eq, w);
    x_meas_prev = x_meas;
    u_cmd_prev = u_cmd;
    have_prev = true;
  }

  log.summary.containment_ok = containment_ok;
  if (!log.records.empty()) {
    const auto& last = log.records.back();
    double err = 0.0;
    for (int i = 0; i < setup.model.pos_count; ++i) {
      err = std::max(err, std::abs(last.x_true(i) - last.ref(i)));
    }
    log.summary.final_tracking_error = err;
    std::vector<double> times, step_times;
    times.reserve(log.records.size());
    step_times.reserve(log.records.size());
    double total = 0.0;
    for (const auto& r : log.records) {
      times.push_back(r.solve_ms);
      step_times.push_back(r.step_ms);
      total += r.solve_ms;
      log.summary.max_solve_ms = std::max(log.summary.max_solve_ms, r.solve_ms);
    }
    std::sort(times.begin(), times.end());
    std::sort(step_times.begin(), step_times.end());
    log.summary.mean_solve_ms = total / static_cast<double>(times.size());
    log.summary.median_solve_ms = times[times.size() / 2];
    log.summary.median_step_ms = step_times[step_times.size() / 2];
    log.summary.final_theta_lo = last.theta_lo(0);
    log.summary.final_theta_hi = last.theta_hi(0);
  }
  return log;
}

}  // namespace rampc
