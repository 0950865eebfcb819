#include "ads/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#ifndef ADS_VERSION
#define ADS_VERSION "unknown"
#endif

namespace ads {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version_string() { return ADS_VERSION; }

std::vector<double> effective_snapshot_times(const RunConfig& c) {
  if (!c.outputs.emit_densities) return {};
  if (!c.outputs.snapshot_times.empty()) return c.outputs.snapshot_times;
  std::vector<double> t;
  const double t_final = c.time.t_final.value_or(0.0);
  for (int i = 0; i <= 50; ++i) t.push_back(t_final * i / 50.0);
  return t;
}

namespace {

// Everything that determines the numbers; the output location does not.
std::string fingerprint(const RunConfig& c) {
  json j = config_to_json(c);
  j.erase("outputs");
  j["snapshot_times_ms"] = effective_snapshot_times(c);
  j.erase("convergence");
  return hex64(fnv1a64(j.dump()));
}

json convergence_json(const ConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"dt_ms", r.dt}, {"p1", r.p1}, {"p2", r.p2}, {"p3", r.p3},
                    {"xbar_um", r.xbar}, {"norm", r.norm}, {"l2_diff_to_next", r.diff_to_next}});
  json out = {{"rows", rows}, {"order_estimates", rep.order_estimates}};
  if (rep.rows.size() >= 2) {
    const auto& a = rep.rows[rep.rows.size() - 2];
    const auto& b = rep.rows.back();
    out["final_p1_change"] = std::abs(a.p1 - b.p1);
    out["final_xbar_change_um"] = std::abs(a.xbar - b.xbar);
  }
  return out;
}

json build_manifest(const RunOutcome& o, unsigned workers) {
  const ResolvedRun& r = o.run;
  const RunConfig& c = r.config;
  const EnsembleResult& e = o.result;
  const Grid& g = *r.grid;
  json hist = json::array();
  for (auto n : e.jump_histogram) hist.push_back(n);
  return {
      {"format", "ads-manifest/1"},
      {"version", version_string()},
      {"config", config_to_json(c)},
      {"fingerprint", fingerprint(c)},
      {"base_seed", c.ensemble.base_seed},
      {"seed_rule", "splitmix64: seed_i = mix64(base_seed + (i + 1) * 0x9E3779B97F4A7C15)"},
      {"seeds", e.seeds},
      {"grid",
       {{"x_min_um", g.x_min},
        {"x_max_um", g.x_max},
        {"n_points", g.n_points},
        {"dx_um", g.dx},
        {"k_offset_per_um", g.k_offset},
        {"frame", to_string(c.grid.frame)}}},
      {"time",
       {{"dt_ms", r.plan.dt},
        {"requested_dt_ms", *c.time.dt},
        {"n_steps", r.plan.n_steps},
        {"t_final_ms", *c.time.t_final},
        {"sample_every", *c.time.sample_every}}},
      {"derived",
       {{"hbar_over_m_um2_per_ms", r.derived.hbar_over_m},
        {"k0_per_um", r.derived.k0},
        {"un_product", r.derived.un_product},
        {"kappa_dt", r.derived.kappa * r.plan.dt}}},
      {"results",
       {{"n_traj", e.n_traj},
        {"transmission", e.transmission},
        {"transmission_se", e.transmission_se},
        {"reflection", e.reflection},
        {"final_p1", e.final_p1},
        {"final_p3", e.final_p3},
        {"total_jumps", e.total_jumps},
        {"jumps_mean", e.jumps_mean},
        {"jump_histogram", hist},
        {"resumed_trajectories", e.resumed_from}}},
      {"convergence", convergence_json(o.convergence)},
      {"workers", workers},
      {"wall_clock_s", o.wall_seconds},
  };
}

}  // namespace

EnsembleOptions ensemble_options(const ResolvedRun& r, const RunOptions& options) {
  const RunConfig& c = r.config;
  EnsembleOptions eo;
  eo.n_traj = *c.ensemble.n_traj;
  eo.base_seed = c.ensemble.base_seed;
  eo.sample_every = *c.time.sample_every;
  eo.snapshot_times = effective_snapshot_times(c);
  eo.workers = std::max(1u, options.workers);
  eo.share_prefix = c.ensemble.share_prefix;
  eo.checkpoint_budget_mb = c.ensemble.checkpoint_budget_mb;
  eo.x_det = c.detector;
  eo.travel = r.travel;
  eo.checkpoint_interval_s = options.checkpoint_interval_s;
  eo.resume = options.resume;
  eo.progress = options.progress;
  return eo;
}

RunOutcome execute_run(const RunConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome o{resolve(config), {}, {}, 0, {}, {}};
  const RunConfig& c = o.run.config;
  EnsembleOptions eo = ensemble_options(o.run, options);
  const fs::path dir(c.outputs.directory);
  if (options.write_outputs) {
    fs::create_directories(dir);
    eo.checkpoint_path = (dir / "ensemble.ckpt").string();
    eo.checkpoint_fingerprint = fingerprint(c);
  }
  o.result = run_ensemble(*o.run.initial, o.run.plan, o.run.derived, c.model, eo);

  if (c.convergence.enabled && c.convergence.refinements > 0) {
    std::vector<double> dts{*c.time.dt};
    for (std::size_t i = 0; i < c.convergence.refinements; ++i) dts.push_back(dts.back() / 2);
    o.convergence =
        convergence_study(*o.run.initial, o.run.derived, c.model, *c.time.t_final, dts);
  }
  o.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.write_outputs) {
    write_timeseries_csv((dir / "timeseries.csv").string(), o.result);
    o.files.push_back("timeseries.csv");
    if (c.outputs.emit_densities)
      for (auto& n : write_snapshots(dir.string(), *o.run.grid, o.result.snapshots))
        o.files.push_back(n);
  }
  o.manifest = build_manifest(o, eo.workers);
  if (options.write_outputs) {
    json files = json::object();
    for (const auto& name : o.files) {
      const auto path = (dir / name).string();
      files[name] = {{"bytes", fs::file_size(path)}, {"fnv1a64", hex64(fnv1a64_file(path))}};
    }
    o.manifest["files"] = files;
    write_text_file((dir / "manifest.json").string(), o.manifest.dump(2) + "\n");
  }
  return o;
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "v0") return SweepParam::v0;
  if (s == "n_atoms") return SweepParam::n_atoms;
  throw ValidationError("param", "expected v0 or n_atoms, got '" + s + "'");
}

std::string to_string(SweepParam p) { return p == SweepParam::v0 ? "v0" : "n_atoms"; }

RunConfig with_swept_value(const RunConfig& base, SweepParam param, double value) {
  RunConfig c = base;
  if (param == SweepParam::v0) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw ValidationError("values", "v0 values are speeds in cm/s and must be positive");
    c.params.v0 = value * 1e-2;
  } else {
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e15)
      throw ValidationError("values", "n_atoms values must be whole numbers >= 1");
    c.params.n_atoms = static_cast<std::uint64_t>(value);
  }
  return c;
}

SweepOutcome execute_sweep(const RunConfig& base, SweepParam param,
                           const std::vector<double>& values, const RunOptions& options,
                           const std::function<void(std::size_t, const std::string&)>& on_point) {
  if (values.empty()) throw ValidationError("values", "at least one value is required");
  // Every value is checked before any run starts.
  std::vector<RunConfig> configs;
  for (double v : values) configs.push_back(with_swept_value(base, param, v));

  const fs::path dir(base.outputs.directory);
  if (options.write_outputs) fs::create_directories(dir);
  SweepOutcome out;
  json points = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", i);
    RunConfig c = configs[i];
    c.outputs.directory = (dir / name).string();
    SweepRow row;
    row.value = values[i];
    json point = {{"value", values[i]}, {"directory", name}};
    try {
      const RunOutcome o = execute_run(c, options);
      row.transmission = o.result.transmission;
      row.final_p1 = o.result.final_p1;
      row.final_p3 = o.result.final_p3;
      row.jumps_mean = o.result.jumps_mean;
      point["transmission"] = row.transmission;
      point["transmission_se"] = o.result.transmission_se;
      point["final_p1"] = row.final_p1;
      point["final_p3"] = row.final_p3;
      point["jumps_mean"] = row.jumps_mean;
      point["n_points"] = o.run.grid->n_points;
      point["t_final_ms"] = *o.run.config.time.t_final;
      if (on_point) on_point(i, "");
    } catch (const std::exception& e) {
      row.error = e.what();
      point["error"] = row.error;
      if (on_point) on_point(i, row.error);
    }
    out.rows.push_back(row);
    points.push_back(point);
  }
  out.manifest = {
      {"format", "ads-sweep-manifest/1"},
      {"version", version_string()},
      {"param", to_string(param)},
      {"units", param == SweepParam::v0 ? "cm/s" : "atoms"},
      {"values", values},
      {"seed_policy", "every point reuses the base config's base_seed"},
      {"base_config", config_to_json(base)},
      {"points", points},
  };
  if (options.write_outputs) {
    write_sweep_csv((dir / "sweep.csv").string(), out.rows);
    out.manifest["files"] = {{"sweep.csv", hex64(fnv1a64_file((dir / "sweep.csv").string()))}};
    write_text_file((dir / "manifest.json").string(), out.manifest.dump(2) + "\n");
  }
  return out;
}

}  // namespace ads
