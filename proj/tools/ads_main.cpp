// Command-line front end: run, sweep and verify.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "ads/checks.hpp"
#include "ads/config.hpp"
#include "ads/runner.hpp"

namespace {

using namespace ads;

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDomain = 3;

unsigned default_workers(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("ADS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ValidationError("ADS_WORKERS", "must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Prints at most one progress line per second to stderr.
std::function<void(const EnsembleProgress&)> progress_printer(bool quiet, std::string label) {
  if (quiet) return {};
  auto last = std::make_shared<std::chrono::steady_clock::time_point>();
  auto mutex = std::make_shared<std::mutex>();
  return [=](const EnsembleProgress& p) {
    std::lock_guard lock(*mutex);
    const auto now = std::chrono::steady_clock::now();
    if (p.done < p.total && now - *last < std::chrono::seconds(1)) return;
    *last = now;
    std::fprintf(stderr, "[%s] shared path %zu/%zu steps, trajectories %zu/%zu\n", label.c_str(),
                 p.shared_steps, p.shared_total, p.done, p.total);
  };
}

struct Common {
  std::string config_path;
  std::string preset;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  std::string output;
  unsigned workers = 0;
  bool resume = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "Run configuration (JSON, or a manifest.json to repeat a run)");
  app->add_option("--preset", c.preset, "Parameter preset when no config is given")
      ->check(CLI::IsMember({"paper", "desk"}));
  app->add_option("--scenario", c.scenario, "forward_1, backward_1, backward_3 or custom");
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--n-traj", c.n_traj, "Number of trajectories");
  app->add_option("--output", c.output, "Output directory");
  app->add_option("--workers", c.workers, "Worker threads (default: ADS_WORKERS, else all cores)");
  app->add_flag("--resume", c.resume, "Continue from the checkpoint in the output directory");
  app->add_flag("--quiet", c.quiet, "No progress output");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    cfg = load_config(c.config_path);
    if (!c.preset.empty() && preset_from_string(c.preset) != cfg.preset)
      throw ValidationError("preset", "conflicts with the config file; edit the file instead");
  } else {
    cfg = preset_config(c.preset.empty() ? Preset::desk : preset_from_string(c.preset),
                        Scenario::forward_1);
  }
  if (!c.scenario.empty()) apply_scenario(cfg, scenario_from_string(c.scenario));
  if (c.seed) cfg.ensemble.base_seed = *c.seed;
  if (c.n_traj) cfg.ensemble.n_traj = *c.n_traj;
  if (!c.output.empty()) cfg.outputs.directory = c.output;
  return cfg;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError("values", "not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("values", "at least one value is required");
  return out;
}

int cmd_run(const Common& c) {
  const RunConfig cfg = build_config(c);
  RunOptions ro;
  ro.workers = default_workers(c.workers);
  ro.resume = c.resume;
  ro.progress = progress_printer(c.quiet, "run " + to_string(cfg.scenario));
  const RunOutcome o = execute_run(cfg, ro);
  const auto& r = o.result;
  std::printf("scenario %s (%s): %zu trajectories, %zu grid points, dt = %g ms, %zu steps\n",
              to_string(o.run.config.scenario).c_str(), to_string(o.run.config.preset).c_str(),
              r.n_traj, o.run.grid->n_points, o.run.plan.dt, o.run.plan.n_steps);
  std::printf("final P1 = %.6f  P3 = %.6f  T = %.6g (se %.2g)  R = %.6g  jumps/trajectory = %.4f\n",
              r.final_p1, r.final_p3, r.transmission, r.transmission_se, r.reflection, r.jumps_mean);
  std::printf("outputs in %s (%.1f s)\n", o.run.config.outputs.directory.c_str(), o.wall_seconds);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& values) {
  const RunConfig cfg = build_config(c);
  const SweepParam sp = sweep_param_from_string(param);
  const auto vals = parse_values(values);
  RunOptions ro;
  ro.workers = default_workers(c.workers);
  ro.progress = progress_printer(c.quiet, "sweep " + param);
  const SweepOutcome out = execute_sweep(cfg, sp, vals, ro, [&](std::size_t i, const std::string& err) {
    if (err.empty()) std::fprintf(stderr, "[sweep] point %zu (%s = %g) done\n", i, param.c_str(), vals[i]);
    else std::fprintf(stderr, "[sweep] point %zu (%s = %g) failed: %s\n", i, param.c_str(), vals[i], err.c_str());
  });
  std::printf("%s\n", kSweepHeader);
  std::fputs(format_sweep_csv(out.rows).substr(std::string(kSweepHeader).size() + 1).c_str(), stdout);
  std::size_t failed = 0;
  for (const auto& row : out.rows) failed += !row.error.empty();
  std::printf("outputs in %s, %zu of %zu points failed\n", cfg.outputs.directory.c_str(), failed,
              out.rows.size());
  return 0;
}

int cmd_verify(const std::string& suite, unsigned workers_flag, bool quiet) {
  CheckContext ctx;
  ctx.workers = default_workers(workers_flag);
  if (!quiet) ctx.log = [](const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); };
  bool all = true;
  std::printf("%-34s %-6s %9s  %s\n", "check", "result", "seconds", "detail");
  for (const auto& check : verify_suite(suite == "full")) {
    CheckResult r;
    try {
      r = check.run(ctx);
    } catch (const std::exception& e) {
      r = {check.name, false, std::string("error: ") + e.what(), 0};
    }
    all = all && r.passed;
    std::printf("%-34s %-6s %9.1f  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");
  return all ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity atom-diode simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ads::version_string());

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run one ensemble and write timeseries.csv and manifest.json");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string param, values;
  auto* sweep = app.add_subcommand("sweep", "One run per value; writes sweep.csv");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", param, "v0 (cm/s) or n_atoms")->required()->check(CLI::IsMember({"v0", "n_atoms"}));
  sweep->add_option("--values", values, "Comma-separated values")->required();

  std::string suite = "fast";
  unsigned verify_workers = 0;
  bool verify_quiet = false;
  auto* verify = app.add_subcommand("verify", "Run the oracle and invariant battery");
  verify->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--workers", verify_workers, "Worker threads");
  verify->add_flag("--quiet", verify_quiet, "No progress notes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, param, values);
    if (*verify) return cmd_verify(suite, verify_workers, verify_quiet);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitValidation;
  } catch (const NyquistViolation& e) {
    std::fprintf(stderr, "grid error: %s\n", e.what());
    return kExitDomain;
  } catch (const DomainTooSmall& e) {
    std::fprintf(stderr, "grid error: %s\n", e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
