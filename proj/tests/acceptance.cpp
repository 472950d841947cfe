// Acceptance suite: runs every scenario-level requirement end to end and
// prints one pass/fail line per criterion. Returns the number of failures.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <vector>

#include "rampc/sim.hpp"

using namespace rampc;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] C%-2d %-28s %s\n", pass ? "PASS" : "FAIL", index, name,
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

ScenarioConfig load_config(const char* name) {
  return ScenarioConfig::load(std::string(RAMPC_CONFIG_DIR) + "/" + name);
}

struct Batch {
  int runs = 0;
  int contained = 0;
  int clean = 0;  // no falsified updates, no infeasible steps
  double worst_violation = -1e30;
  double worst_width10_g = 0.0;  // mass-interval width after 10 steps
  std::vector<double> median_solve_ms;
  std::vector<double> median_step_ms;
};

Batch run_seeds(const ScenarioConfig& base, const SynthesisArtifacts& arts, int seeds,
                int steps) {
  Batch b;
  for (int s = 1; s <= seeds; ++s) {
    ScenarioConfig cfg = base;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.run_length = steps;
    const RunLog log = run_closed_loop(cfg, arts);
    ++b.runs;
    if (log.summary.containment_ok) ++b.contained;
    if (log.summary.falsified_count == 0 && log.summary.infeasible_count == 0) ++b.clean;
    b.worst_violation = std::max(b.worst_violation, log.summary.max_violation);
    if (static_cast<int>(log.records.size()) > 10) {
      const auto& r = log.records[10];
      b.worst_width10_g = std::max(
          b.worst_width10_g, 1000.0 * (1.0 / r.theta_lo(0) - 1.0 / r.theta_hi(0)));
    }
    b.median_solve_ms.push_back(log.summary.median_solve_ms);
    b.median_step_ms.push_back(log.summary.median_step_ms);
  }
  return b;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

// One-step tube containment oracle: solve each step, then check every sampled
// successor of the measured state against the first predicted tube set.
struct ContainmentOracle {
  int samples = 0;
  int failures = 0;
  double worst = -1e30;
};

ContainmentOracle mc_tube_containment(const ScenarioConfig& config,
                                      const SynthesisArtifacts& arts, int steps,
                                      int samples_per_step) {
  const ScenarioSetup setup = build_setup(config);
  const ParametricSystem& sys = setup.model.sys;
  const QuadrotorParams q = config.quad();
  const int n = sys.n();

  ControllerConfig cfg;
  cfg.N = config.N;
  cfg.artifacts = arts;
  cfg.baseline_theta = Eigen::VectorXd::Constant(1, 1.0 / config.baseline_mass);

  Eigen::VectorXd x_bound(n), u_bound(sys.m());
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
  EstimatorState est =
      EstimatorState::initial(setup.theta0, default_lms_gain(sys, x_bound, u_bound));

  const Hyperbox W_box =
      wind_disturbance_box(setup.model, q, config.wind_speed, config.drag_coeff);
  DisturbanceStream wind(config.seed, W_box, config.wind.profile, config.wind.fraction,
                         config.wind.direction);
  const auto w_verts = box_vertices(W_box);

  Eigen::VectorXd theta_star(1);
  theta_star(0) = config.theta_star();
  Eigen::VectorXd u_ss = update_steady_state(cfg, est, q);

  PlantState plant;
  plant.x_true = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < setup.model.pos_count && !config.references.empty(); ++i) {
    ref(i) = config.references.front().value[static_cast<size_t>(i)];
  }

  ContainmentOracle oracle;
  std::mt19937_64 rng(config.seed ^ 0xABCDEF);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  bool have_prev = false;
  Eigen::VectorXd x_prev, u_prev;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd x_meas = plant.x_true;  // noiseless oracle runs
    if (have_prev) {
      const Eigen::MatrixXd D = d_matrix(sys, x_prev, u_prev);
      const Eigen::VectorXd d =
          d_offset(sys, x_prev, u_prev, x_meas + setup.model.grav_feedforward);
      est = update_theta_set(est, nonfalsified_halfspaces(D, d, setup.W));
      est = update_point_estimate(est, D, x_prev, u_prev,
                                  x_meas + setup.model.grav_feedforward, sys);
      u_ss = update_steady_state(cfg, est, q);
    }

    const Eigen::VectorXd x_qp = x_meas - ref;
    const TubeSolution sol = solve_step(x_qp, est, cfg, sys);
    const Eigen::VectorXd u_dev = sol.u0;

    for (int s = 0; s < samples_per_step; ++s) {
      Eigen::VectorXd theta(1);
      theta(0) = (s % 4 == 0)   ? est.theta_set.lo(0)
                 : (s % 4 == 1) ? est.theta_set.hi(0)
                                : est.theta_set.lo(0) +
                                      unif(rng) * (est.theta_set.hi(0) -
                                                   est.theta_set.lo(0));
      Eigen::VectorXd w(n);
      if (s % 2 == 0) {
        w = w_verts[static_cast<size_t>(s / 2) % w_verts.size()];
      } else {
        for (int i = 0; i < n; ++i) {
          w(i) = W_box.lo(i) + unif(rng) * (W_box.hi(i) - W_box.lo(i));
        }
      }
      const auto [A, B] = eval_system(sys, theta);
      const Eigen::VectorXd x_next = A * x_qp + B * u_dev + w;
      const double excess =
          ((arts.X0.H * (x_next - sol.x_bar.col(1))).array() - sol.alpha(1)).maxCoeff();
      ++oracle.samples;
      oracle.worst = std::max(oracle.worst, excess);
      if (excess > 1e-7) ++oracle.failures;
    }

    const Eigen::VectorXd u_cmd = u_ss + u_dev;
    const Eigen::VectorXd w = wind.next();
    plant = plant_step(plant, u_cmd, sys, theta_star, setup.u_eq, w);
    x_prev = x_meas;
    u_prev = u_cmd;
    have_prev = true;
  }
  return oracle;
}

}  // namespace

int main() {
  const auto suite_t0 = std::chrono::steady_clock::now();

  ScenarioConfig alt_cfg = load_config("altitude_mass.json");
  ScenarioConfig fail_cfg = load_config("altitude_failure.json");
  ScenarioConfig base_cfg = load_config("altitude_baseline.json");
  ScenarioConfig dir_cfg = load_config("direct_mass.json");

  const SynthesisArtifacts alt_arts = synthesize(alt_cfg);
  const SynthesisArtifacts fail_arts = synthesize(fail_cfg);
  const SynthesisArtifacts dir_arts = synthesize(dir_cfg);

  // ---- C1: parameter containment across seeded runs -----------------------
  ScenarioConfig alt_uniform = alt_cfg;
  alt_uniform.wind.profile = "uniform";
  const Batch b_alt = run_seeds(alt_uniform, alt_arts, 50, 40);
  const Batch b_fail = run_seeds(fail_cfg, fail_arts, 50, 60);
  const Batch b_dir = run_seeds(dir_cfg, dir_arts, 50, 12);

  ScenarioConfig alt_noisy = alt_uniform;
  alt_noisy.noise.enabled = true;
  alt_noisy.noise.dilation = true;
  const Batch b_noisy_on = run_seeds(alt_noisy, alt_arts, 50, 40);

  ScenarioConfig alt_noisy_off = alt_noisy;
  alt_noisy_off.noise.dilation = false;
  alt_noisy_off.on_falsified = "continue";
  int off_runs = 0;
  int off_lost = 0;
  for (int s = 1; s <= 25; ++s) {
    ScenarioConfig cfg = alt_noisy_off;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.run_length = 40;
    const RunLog log = run_closed_loop(cfg, alt_arts);
    ++off_runs;
    if (!log.summary.containment_ok || log.summary.falsified_count > 0) ++off_lost;
  }

  const bool c1 = b_alt.contained == b_alt.runs && b_fail.contained == b_fail.runs &&
                  b_dir.contained == b_dir.runs && b_noisy_on.contained == b_noisy_on.runs &&
                  b_alt.clean == b_alt.runs && b_fail.clean == b_fail.runs &&
                  b_dir.clean == b_dir.runs && b_noisy_on.clean == b_noisy_on.runs &&
                  off_lost > 0;
  report(1, "parameter containment", c1,
         fmt("%d/%d seeded runs contained (mass, failure, direct, noisy+dilation); "
             "dilation off: %d/%d runs lost the true parameter",
             b_alt.contained + b_fail.contained + b_dir.contained + b_noisy_on.contained,
             b_alt.runs + b_fail.runs + b_dir.runs + b_noisy_on.runs, off_lost, off_runs));

  // ---- C2: set convergence in the direct-thrust scenario ------------------
  ScenarioConfig dir_canonical = dir_cfg;
  dir_canonical.run_length = 12;
  const RunLog dir_run = run_closed_loop(dir_canonical, dir_arts);
  const auto& r10 = dir_run.records[10];
  const double width10_g = 1000.0 * (1.0 / r10.theta_lo(0) - 1.0 / r10.theta_hi(0));
  ScenarioConfig dir_uniform = dir_cfg;
  dir_uniform.wind.profile = "uniform";
  const Batch b_dir_u = run_seeds(dir_uniform, dir_arts, 5, 12);
  const bool c2 = width10_g <= 1.2 && b_dir_u.worst_width10_g <= 1.5 &&
                  b_dir.worst_width10_g <= 1.5;
  report(2, "set convergence", c2,
         fmt("mass width after 10 steps: %.3f g at the wind bound (<= 1.2); worst "
             "across seeds %.3f g (<= 1.5)",
             width10_g, std::max(b_dir_u.worst_width10_g, b_dir.worst_width10_g)));

  // ---- C3: hard constraint satisfaction ------------------------------------
  const double worst_violation =
      std::max({b_alt.worst_violation, b_fail.worst_violation, b_dir.worst_violation,
                b_noisy_on.worst_violation, dir_run.summary.max_violation});
  const bool c3 = worst_violation <= 1e-6;
  report(3, "constraint satisfaction", c3,
         fmt("worst true-state/input excess over all runs: %.3e (solver tolerance 1e-6)",
             worst_violation));

  // ---- C4: failure recovery -------------------------------------------------
  ScenarioConfig fail_one = fail_cfg;
  fail_one.run_length = 100;
  const RunLog fail_run = run_closed_loop(fail_one, fail_arts);
  const bool feasible_throughout = fail_run.summary.infeasible_count == 0;
  const int k_fail = fail_one.failure.t_fail;
  const int k_deadline = k_fail + 50;  // 5 s at the 0.1 s sample time
  bool recovered = true;
  double offset_after = 0.0;
  int offset_count = 0;
  for (const auto& rec : fail_run.records) {
    const double err = std::abs(rec.x_true(0) - rec.ref(0));
    if (rec.k >= k_deadline) {
      recovered = recovered && err <= 0.05;
      offset_after += err;
      ++offset_count;
    }
  }
  const double mean_offset = offset_count ? offset_after / offset_count : 0.0;
  const bool c4 = feasible_throughout && recovered && mean_offset >= 1e-4;
  report(4, "failure recovery", c4,
         fmt("feasible at every step: %s; |err| <= 0.05 m within 5 s: %s; persistent "
             "offset %.4f m",
             feasible_throughout ? "yes" : "NO", recovered ? "yes" : "NO", mean_offset));

  // ---- C5: baseline contrast -------------------------------------------------
  ScenarioConfig adaptive_c5 = alt_cfg;
  adaptive_c5.run_length = 120;
  adaptive_c5.references.clear();
  adaptive_c5.references.push_back({0, {0.3}});
  ScenarioConfig baseline_c5 = base_cfg;
  baseline_c5.run_length = 120;
  baseline_c5.references.clear();
  baseline_c5.references.push_back({0, {0.3}});
  const RunLog run_a = run_closed_loop(adaptive_c5, alt_arts);
  const RunLog run_b = run_closed_loop(baseline_c5, alt_arts);
  const double err_a = run_a.summary.final_tracking_error;
  const double err_b = run_b.summary.final_tracking_error;
  const bool c5 = err_a <= 0.02 && err_b >= 5.0 * err_a;
  report(5, "baseline contrast", c5,
         fmt("steady-state error: adaptive %.4f m (<= 0.02), fixed-mass baseline %.4f m "
             "(%.1fx)",
             err_a, err_b, err_b / std::max(err_a, 1e-12)));

  // ---- C6: contractivity certificates ----------------------------------------
  const ScenarioSetup alt_setup = build_setup(alt_cfg);
  const ScenarioSetup dir_setup = build_setup(dir_cfg);
  const auto alt_cert = verify_contractive(alt_arts.X0, alt_setup.model.sys, alt_arts.K,
                                           box_vertices(alt_setup.theta0));
  const auto dir_cert = verify_contractive(dir_arts.X0, dir_setup.model.sys, dir_arts.K,
                                           box_vertices(dir_setup.theta0));
  const double alt_terminal = alt_arts.lambda + alt_arts.c.maxCoeff() * alt_arts.w_bar;
  const double dir_terminal = dir_arts.lambda + dir_arts.c.maxCoeff() * dir_arts.w_bar;
  const double alt_lb = lambda_bar(alt_arts.X0, alt_setup.model.sys, alt_arts.K,
                                   alt_setup.theta0.center(), alt_setup.theta0.side());
  const double dir_lb = lambda_bar(dir_arts.X0, dir_setup.model.sys, dir_arts.K,
                                   dir_setup.theta0.center(), dir_setup.theta0.side());
  const bool c6 = alt_cert.lambda <= 0.9 + 1e-8 && dir_cert.lambda <= 0.9 + 1e-8 &&
                  alt_terminal <= 1.0 && dir_terminal <= 1.0;
  report(6, "contractivity certificate", c6,
         fmt("certified rates %.6f / %.6f (<= 0.9); terminal margins %.4f / %.4f; "
             "two-term bounds %.3f / %.3f",
             alt_cert.lambda, dir_cert.lambda, 1.0 - alt_terminal, 1.0 - dir_terminal,
             alt_lb, dir_lb));

  // ---- C7: one-step tube containment oracle ----------------------------------
  const ContainmentOracle mc_alt = mc_tube_containment(alt_cfg, alt_arts, 10, 500);
  const ContainmentOracle mc_dir = mc_tube_containment(dir_cfg, dir_arts, 10, 500);
  const bool c7 = mc_alt.failures == 0 && mc_dir.failures == 0;
  report(7, "one-step tube containment", c7,
         fmt("%d samples, %d failures; worst excess %.2e / %.2e (tolerance 1e-7)",
             mc_alt.samples + mc_dir.samples, mc_alt.failures + mc_dir.failures,
             mc_alt.worst, mc_dir.worst));

  // ---- C8: Lyapunov decrease at the vertices ----------------------------------
  const auto a2_alt = verify_terminal_decrease(alt_arts.K, alt_arts.P, alt_setup.model.sys,
                                         box_vertices(alt_setup.theta0), alt_arts.Q,
                                         alt_arts.R);
  const auto a2_dir = verify_terminal_decrease(dir_arts.K, dir_arts.P, dir_setup.model.sys,
                                         box_vertices(dir_setup.theta0), dir_arts.Q,
                                         dir_arts.R);
  const auto a2_perturbed = verify_terminal_decrease(
      alt_arts.K, 0.9 * alt_arts.P, alt_setup.model.sys, box_vertices(alt_setup.theta0),
      alt_arts.Q, alt_arts.R);
  const bool c8 = a2_alt.ok && a2_dir.ok && !a2_perturbed.ok;
  report(8, "terminal cost decrease", c8,
         fmt("vertex check: altitude %s, direct %s; -10%% perturbation detected: %s",
             a2_alt.ok ? "ok" : "FAIL", a2_dir.ok ? "ok" : "FAIL",
             !a2_perturbed.ok ? "yes" : "NO"));

  // ---- C9: per-step timing ------------------------------------------------------
  const double alt_median = median(b_alt.median_solve_ms);
  const double dir_median = median(b_dir.median_step_ms);
  const bool c9 = alt_median <= 10.0 && dir_median <= 180.0;
  report(9, "solve-time targets", c9,
         fmt("altitude median solve %.2f ms (<= 10); direct identification+solve "
             "median %.2f ms (<= 180)",
             alt_median, dir_median));

  // ---- C10: determinism -----------------------------------------------------------
  ScenarioConfig det_cfg = alt_noisy;
  det_cfg.seed = 424242;
  det_cfg.run_length = 30;
  const std::uint64_t h1 = run_closed_loop(det_cfg, alt_arts).hash();
  const std::uint64_t h2 = run_closed_loop(det_cfg, alt_arts).hash();
  ScenarioConfig det_dir = dir_cfg;
  det_dir.run_length = 8;
  const std::uint64_t h3 = run_closed_loop(det_dir, dir_arts).hash();
  const std::uint64_t h4 = run_closed_loop(det_dir, dir_arts).hash();
  const bool c10 = h1 == h2 && h3 == h4;
  report(10, "determinism", c10,
         fmt("repeated run hashes match: altitude %s, direct %s", h1 == h2 ? "yes" : "NO",
             h3 == h4 ? "yes" : "NO"));

  const double total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_t0).count();
  std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, total_s);
  return g_failures;
}
