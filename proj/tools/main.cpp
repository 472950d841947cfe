// Command-line front end: offline synthesis with on-disk caching, closed-loop
// runs with CSV/JSON exports, and a health report over existing logs.
//
// Exit codes: 0 ok, 1 usage/config error, 2 validation failure,
// 3 runtime guarantee event (falsified model, infeasible step or violation).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rampc/config.hpp"
#include "rampc/sim.hpp"

namespace fs = std::filesystem;
using namespace rampc;

namespace {

fs::path default_out_dir() {
  if (const char* env = std::getenv("RAMPC_OUT_DIR")) return fs::path(env);
  return fs::path(".");
}

fs::path artifacts_path(const fs::path& out_dir, const fs::path& config_path) {
  return out_dir / (config_path.stem().string() + ".artifacts.json");
}

// Loads cached artifacts when the config hash matches, otherwise runs the
// full synthesis and rewrites the cache.
SynthesisArtifacts load_or_synthesize(const ScenarioConfig& cfg, const fs::path& out_dir,
                                      const fs::path& config_path, bool* cache_hit) {
  const fs::path path = artifacts_path(out_dir, config_path);
  if (fs::exists(path)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    SynthesisArtifacts a = SynthesisArtifacts::from_json(j);
    if (a.config_hash == cfg.synthesis_hash()) {
      if (cache_hit) *cache_hit = true;
      return a;
    }
  }
  if (cache_hit) *cache_hit = false;
  SynthesisArtifacts a = synthesize(cfg);
  fs::create_directories(out_dir);
  std::ofstream out(path);
  out << a.to_json().dump(2) << '\n';
  return a;
}

void apply_overrides(ScenarioConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& mode, bool no_noise,
                     const std::optional<int>& fail_at, const std::optional<int>& steps) {
  if (seed) cfg.seed = *seed;
  if (mode) cfg.mode = *mode;
  if (no_noise) cfg.noise.enabled = false;
  if (fail_at) {
    cfg.failure.enabled = true;
    cfg.failure.t_fail = *fail_at;
  }
  if (steps) cfg.run_length = *steps;
  if (cfg.mode == "robust-baseline") cfg.ss_update = false;
  cfg.validate();
}

int cmd_synthesize(const std::string& config_path, const fs::path& out_dir) {
  ScenarioConfig cfg = ScenarioConfig::load(config_path);
  bool cache_hit = false;
  SynthesisArtifacts a;
  try {
    a = load_or_synthesize(cfg, out_dir, config_path, &cache_hit);
  } catch (const SynthesisError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 2;
  } catch (const ContractionBudgetError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 2;
  }
  const ScenarioSetup setup = build_setup(cfg);
  const ValidationReport rep = validate_artifacts(a, setup.model.sys, setup.theta0, setup.W);
  std::cout << "artifacts: " << artifacts_path(out_dir, config_path).string()
            << (cache_hit ? " (cache hit)" : " (synthesized)") << '\n'
            << "  half-spaces:        " << a.X0.rows() << '\n'
            << "  contractivity:      " << rep.contractivity << " (target " << a.lambda
            << ")\n"
            << "  terminal margin:    " << rep.terminal_margin << '\n'
            << "  decrease min eig:   " << rep.decrease_min_eig << '\n'
            << "  w_bar:              " << a.w_bar << '\n'
            << "  validation:         " << (rep.pass ? "pass" : "FAIL") << '\n';
  return rep.pass ? 0 : 2;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir,
            const std::optional<std::uint64_t>& seed, const std::optional<std::string>& mode,
            bool no_noise, const std::optional<int>& fail_at,
            const std::optional<int>& steps) {
  ScenarioConfig cfg = ScenarioConfig::load(config_path);
  apply_overrides(cfg, seed, mode, no_noise, fail_at, steps);

  SynthesisArtifacts a;
  try {
    a = load_or_synthesize(cfg, out_dir, config_path, nullptr);
  } catch (const SynthesisError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 2;
  } catch (const ContractionBudgetError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 2;
  }

  const RunLog log = run_closed_loop(cfg, a);

  fs::create_directories(out_dir);
  const std::string stem =
      fs::path(config_path).stem().string() + "_seed" + std::to_string(cfg.seed);
  {
    std::ofstream csv(out_dir / (stem + ".csv"));
    log.write_csv(csv);
  }
  {
    std::ofstream js(out_dir / (stem + ".json"));
    js << log.to_json().dump(2) << '\n';
  }

  const RunSummary& s = log.summary;
  std::cout << "run: " << cfg.name << " seed " << cfg.seed << " (" << log.records.size()
            << " steps)\n"
            << "  max violation:      " << s.max_violation << '\n'
            << "  containment:        " << (s.containment_ok ? "ok" : "LOST") << '\n'
            << "  final theta set:    [" << s.final_theta_lo << ", " << s.final_theta_hi
            << "]\n"
            << "  final mass set [g]: [" << 1000.0 / s.final_theta_hi << ", "
            << 1000.0 / s.final_theta_lo << "]\n"
            << "  final track error:  " << s.final_tracking_error << '\n'
            << "  solve ms mean/med/max: " << s.mean_solve_ms << " / " << s.median_solve_ms
            << " / " << s.max_solve_ms << '\n'
            << "  infeasible steps:   " << s.infeasible_count << '\n'
            << "  falsified updates:  " << s.falsified_count << '\n'
            << "  log hash:           " << std::hex << log.hash() << std::dec << '\n';

  const bool guarantee_event = s.infeasible_count > 0 || s.falsified_count > 0 ||
                               s.max_violation > 0.0 || !s.containment_ok || s.aborted;
  return guarantee_event ? 3 : 0;
}

int cmd_report(const std::vector<std::string>& logs) {
  if (logs.empty()) {
    std::cerr << "report: no log files given\n";
    return 1;
  }
  int bad = 0;
  std::cout << std::left << std::setw(32) << "run" << std::setw(8) << "steps"
            << std::setw(14) << "violation" << std::setw(12) << "contain" << std::setw(12)
            << "infeas" << std::setw(12) << "falsified" << "flags\n";
  for (const auto& path : logs) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << path << ": cannot open\n";
      ++bad;
      continue;
    }
    nlohmann::json j;
    try {
      in >> j;
      const auto& s = j.at("summary");
      const bool flagged = s.at("max_violation").get<double>() > 0.0 ||
                           !s.at("containment_ok").get<bool>() ||
                           s.at("infeasible_count").get<int>() > 0 ||
                           s.at("falsified_count").get<int>() > 0;
      std::cout << std::left << std::setw(32) << j.at("scenario").get<std::string>()
                << std::setw(8) << j.at("steps").size() << std::setw(14)
                << s.at("max_violation").get<double>() << std::setw(12)
                << (s.at("containment_ok").get<bool>() ? "ok" : "LOST") << std::setw(12)
                << s.at("infeasible_count").get<int>() << std::setw(12)
                << s.at("falsified_count").get<int>() << (flagged ? "FLAGGED" : "-")
                << '\n';
      if (flagged) ++bad;
    } catch (const std::exception& e) {
      std::cerr << path << ": corrupt log (" << e.what() << ")\n";
      ++bad;
    }
  }
  return bad > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust adaptive tube MPC for quadrotor scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_str = default_out_dir().string();
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> fail_at;
  std::optional<int> steps;
  bool no_noise = false;
  std::vector<std::string> log_paths;

  auto* syn = app.add_subcommand("synthesize", "compute and validate offline artifacts");
  syn->add_option("--config", config_path, "scenario config file")->required();
  syn->add_option("--out-dir", out_dir_str, "output directory");

  auto* run = app.add_subcommand("run", "execute one closed-loop scenario");
  run->add_option("--config", config_path, "scenario config file")->required();
  run->add_option("--out-dir", out_dir_str, "output directory");
  run->add_option("--seed", seed, "override the disturbance seed");
  run->add_option("--mode", mode, "adaptive | robust-baseline");
  run->add_flag("--no-noise", no_noise, "disable measurement noise");
  run->add_option("--fail-at", fail_at, "inject the efficiency drop at this step");
  run->add_option("--steps", steps, "override the run length");

  auto* rep = app.add_subcommand("report", "tabulate metrics over run logs");
  rep->add_option("logs", log_paths, "run log JSON files");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out_dir(out_dir_str);
    if (syn->parsed()) return cmd_synthesize(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, mode, no_noise, fail_at, steps);
    return cmd_report(log_paths);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
