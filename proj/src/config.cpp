#include "ads/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace ads {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path, what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "must be an object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& keys) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) fail(join(path, it.key()), "unknown key");
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

std::uint64_t get_unsigned(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) fail(path, "must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  // Whole-valued floats such as 1e5 are accepted for counts.
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  fail(path, "must be a non-negative integer");
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "must be a string");
  return v.get<std::string>();
}

template <class F>
void with(const json& j, const char* key, F&& f) {
  if (auto it = j.find(key); it != j.end()) f(*it);
}

DetuningPlacement placement_from(const std::string& s, const std::string& path) {
  if (s == "excited_state") return DetuningPlacement::excited_state;
  if (s == "level3_literal") return DetuningPlacement::level3_literal;
  fail(path, "expected excited_state or level3_literal, got '" + s + "'");
}

CavityOrdering ordering_from(const std::string& s, const std::string& path) {
  if (s == "jaynes_cummings") return CavityOrdering::jaynes_cummings;
  if (s == "literal_paper") return CavityOrdering::literal_paper;
  fail(path, "expected jaynes_cummings or literal_paper, got '" + s + "'");
}

Frame frame_from(const std::string& s, const std::string& path) {
  if (s == "auto") return Frame::automatic;
  if (s == "lab") return Frame::lab;
  if (s == "co_moving") return Frame::co_moving;
  fail(path, "expected auto, lab or co_moving, got '" + s + "'");
}

std::string to_string(DetuningPlacement d) {
  return d == DetuningPlacement::excited_state ? "excited_state" : "level3_literal";
}
std::string to_string(CavityOrdering c) {
  return c == CavityOrdering::jaynes_cummings ? "jaynes_cummings" : "literal_paper";
}

void parse_params(const json& j, RunConfig& c, bool custom) {
  const std::string path = "params";
  require_object(j, path);
  reject_unknown(j, path,
                 {"omega0", "delta", "kappa", "waist_w", "x_p", "x_s", "y_p", "y_s", "atom_mass_m",
                  "a_s", "delta_t", "n_atoms", "x0", "delta_l", "v0", "initial_level",
                  "initial_direction"});
  PhysicalParams& p = c.params;
  const std::pair<const char*, double*> reals[] = {
      {"omega0", &p.omega0}, {"delta", &p.delta},   {"kappa", &p.kappa},
      {"waist_w", &p.waist_w}, {"x_p", &p.x_p},     {"x_s", &p.x_s},
      {"y_p", &p.y_p},       {"y_s", &p.y_s},       {"atom_mass_m", &p.atom_mass_m},
      {"a_s", &p.a_s},       {"delta_t", &p.delta_t}, {"x0", &p.x0},
      {"delta_l", &p.delta_l}, {"v0", &p.v0}};
  for (const auto& [key, dst] : reals)
    with(j, key, [&](const json& v) { *dst = get_number(v, join(path, key)); });
  with(j, "n_atoms", [&](const json& v) { p.n_atoms = get_unsigned(v, "params.n_atoms"); });
  with(j, "initial_level", [&](const json& v) {
    if (!custom) fail("params.initial_level", "fixed by the scenario; use scenario custom");
    const auto l = get_unsigned(v, "params.initial_level");
    if (l != 1 && l != 3) fail("params.initial_level", "must be 1 or 3");
    p.initial_level = l == 1 ? Level::one : Level::three;
  });
  with(j, "initial_direction", [&](const json& v) {
    if (!custom) fail("params.initial_direction", "fixed by the scenario; use scenario custom");
    const auto s = get_string(v, "params.initial_direction");
    if (s == "positive") p.initial_direction = Direction::positive;
    else if (s == "negative") p.initial_direction = Direction::negative;
    else fail("params.initial_direction", "must be positive or negative");
  });
}

void parse_model(const json& j, RunConfig& c) {
  require_object(j, "model");
  reject_unknown(j, "model", {"detuning_placement", "cavity_ordering", "nonlinearity", "kinetic"});
  with(j, "detuning_placement", [&](const json& v) {
    c.model.detuning_placement = placement_from(get_string(v, "model.detuning_placement"),
                                                "model.detuning_placement");
  });
  with(j, "cavity_ordering", [&](const json& v) {
    c.model.cavity_ordering =
        ordering_from(get_string(v, "model.cavity_ordering"), "model.cavity_ordering");
  });
  with(j, "nonlinearity",
       [&](const json& v) { c.model.nonlinearity_on = get_bool(v, "model.nonlinearity"); });
  with(j, "kinetic", [&](const json& v) { c.model.kinetic_on = get_bool(v, "model.kinetic"); });
}

void parse_grid(const json& j, RunConfig& c) {
  require_object(j, "grid");
  reject_unknown(j, "grid", {"x_min_um", "x_max_um", "n_points", "frame"});
  with(j, "x_min_um", [&](const json& v) { c.grid.x_min = get_number(v, "grid.x_min_um"); });
  with(j, "x_max_um", [&](const json& v) { c.grid.x_max = get_number(v, "grid.x_max_um"); });
  with(j, "n_points", [&](const json& v) {
    if (v.is_null()) c.grid.n_points.reset();
    else c.grid.n_points = get_unsigned(v, "grid.n_points");
  });
  with(j, "frame", [&](const json& v) { c.grid.frame = frame_from(get_string(v, "grid.frame"), "grid.frame"); });
}

void parse_time(const json& j, RunConfig& c) {
  require_object(j, "time");
  reject_unknown(j, "time", {"dt_ms", "t_final_ms", "sample_every"});
  with(j, "dt_ms", [&](const json& v) {
    if (v.is_null()) c.time.dt.reset();
    else c.time.dt = get_number(v, "time.dt_ms");
  });
  with(j, "t_final_ms", [&](const json& v) {
    if (v.is_null()) c.time.t_final.reset();
    else c.time.t_final = get_number(v, "time.t_final_ms");
  });
  with(j, "sample_every", [&](const json& v) {
    if (v.is_null()) c.time.sample_every.reset();
    else c.time.sample_every = get_unsigned(v, "time.sample_every");
  });
}

void parse_ensemble(const json& j, RunConfig& c) {
  require_object(j, "ensemble");
  reject_unknown(j, "ensemble", {"n_traj", "base_seed", "share_prefix", "checkpoint_budget_mb"});
  with(j, "n_traj", [&](const json& v) {
    if (v.is_null()) c.ensemble.n_traj.reset();
    else c.ensemble.n_traj = get_unsigned(v, "ensemble.n_traj");
  });
  with(j, "base_seed", [&](const json& v) { c.ensemble.base_seed = get_unsigned(v, "ensemble.base_seed"); });
  with(j, "share_prefix",
       [&](const json& v) { c.ensemble.share_prefix = get_bool(v, "ensemble.share_prefix"); });
  with(j, "checkpoint_budget_mb", [&](const json& v) {
    c.ensemble.checkpoint_budget_mb = get_unsigned(v, "ensemble.checkpoint_budget_mb");
  });
}

void parse_absorber(const json& j, RunConfig& c) {
  require_object(j, "absorber");
  reject_unknown(j, "absorber", {"enabled", "width_um", "gamma_max_per_ms"});
  with(j, "enabled", [&](const json& v) { c.absorber.enabled = get_bool(v, "absorber.enabled"); });
  with(j, "width_um", [&](const json& v) { c.absorber.width = get_number(v, "absorber.width_um"); });
  with(j, "gamma_max_per_ms", [&](const json& v) {
    if (v.is_null()) c.absorber.gamma_max.reset();
    else c.absorber.gamma_max = get_number(v, "absorber.gamma_max_per_ms");
  });
}

void parse_outputs(const json& j, RunConfig& c) {
  require_object(j, "outputs");
  reject_unknown(j, "outputs", {"directory", "snapshot_times_ms", "emit_densities"});
  with(j, "directory", [&](const json& v) { c.outputs.directory = get_string(v, "outputs.directory"); });
  with(j, "snapshot_times_ms", [&](const json& v) {
    if (!v.is_array()) fail("outputs.snapshot_times_ms", "must be an array of numbers");
    c.outputs.snapshot_times.clear();
    for (std::size_t i = 0; i < v.size(); ++i)
      c.outputs.snapshot_times.push_back(
          get_number(v[i], "outputs.snapshot_times_ms[" + std::to_string(i) + "]"));
  });
  with(j, "emit_densities",
       [&](const json& v) { c.outputs.emit_densities = get_bool(v, "outputs.emit_densities"); });
}

void parse_convergence(const json& j, RunConfig& c) {
  require_object(j, "convergence");
  reject_unknown(j, "convergence", {"enabled", "refinements"});
  with(j, "enabled", [&](const json& v) { c.convergence.enabled = get_bool(v, "convergence.enabled"); });
  with(j, "refinements", [&](const json& v) {
    c.convergence.refinements = get_unsigned(v, "convergence.refinements");
  });
}

template <class T>
json optional_json(const std::optional<T>& o) {
  return o ? json(*o) : json(nullptr);
}

std::size_t next_pow2(double n) {
  std::size_t p = 2;
  while (static_cast<double>(p) < n) p *= 2;
  return p;
}

}  // namespace

std::string to_string(Preset p) { return p == Preset::paper ? "paper" : "desk"; }

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::forward_1: return "forward_1";
    case Scenario::backward_1: return "backward_1";
    case Scenario::backward_3: return "backward_3";
    case Scenario::custom: return "custom";
  }
  return "custom";
}

std::string to_string(Frame f) {
  switch (f) {
    case Frame::automatic: return "auto";
    case Frame::lab: return "lab";
    case Frame::co_moving: return "co_moving";
  }
  return "auto";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "forward_1") return Scenario::forward_1;
  if (s == "backward_1") return Scenario::backward_1;
  if (s == "backward_3") return Scenario::backward_3;
  if (s == "custom") return Scenario::custom;
  fail("scenario", "expected forward_1, backward_1, backward_3 or custom, got '" + s + "'");
}

Preset preset_from_string(const std::string& s) {
  if (s == "paper") return Preset::paper;
  if (s == "desk") return Preset::desk;
  fail("preset", "expected paper or desk, got '" + s + "'");
}

PresetDefaults preset_defaults(Preset p) {
  if (p == Preset::paper) return {1e-5, 1000, 500, 2048};
  return {1e-3, 100, 100, 1024};
}

void apply_scenario(RunConfig& c, Scenario s) {
  c.scenario = s;
  switch (s) {
    case Scenario::forward_1:
      c.params.initial_level = Level::one;
      c.params.initial_direction = Direction::positive;
      break;
    case Scenario::backward_1:
      c.params.initial_level = Level::one;
      c.params.initial_direction = Direction::negative;
      break;
    case Scenario::backward_3:
      c.params.initial_level = Level::three;
      c.params.initial_direction = Direction::negative;
      break;
    case Scenario::custom:
      break;
  }
}

RunConfig preset_config(Preset preset, Scenario scenario) {
  RunConfig c;
  c.preset = preset;
  c.params = preset == Preset::paper ? paper_default_params() : desk_scale_params();
  apply_scenario(c, scenario);
  return c;
}

RunConfig config_from_json(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"preset", "scenario", "params", "model", "grid", "time", "ensemble",
                         "absorber", "outputs", "convergence", "detector_um"});
  Preset preset = Preset::desk;
  Scenario scenario = Scenario::forward_1;
  with(j, "preset", [&](const json& v) { preset = preset_from_string(get_string(v, "preset")); });
  with(j, "scenario", [&](const json& v) { scenario = scenario_from_string(get_string(v, "scenario")); });
  RunConfig c = preset_config(preset, scenario);
  with(j, "params", [&](const json& v) { parse_params(v, c, scenario == Scenario::custom); });
  with(j, "model", [&](const json& v) { parse_model(v, c); });
  with(j, "grid", [&](const json& v) { parse_grid(v, c); });
  with(j, "time", [&](const json& v) { parse_time(v, c); });
  with(j, "ensemble", [&](const json& v) { parse_ensemble(v, c); });
  with(j, "absorber", [&](const json& v) { parse_absorber(v, c); });
  with(j, "outputs", [&](const json& v) { parse_outputs(v, c); });
  with(j, "convergence", [&](const json& v) { parse_convergence(v, c); });
  with(j, "detector_um", [&](const json& v) { c.detector = get_number(v, "detector_um"); });
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("config", "cannot open " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail("config", std::string("parse error: ") + e.what());
  }
  // A run manifest carries its resolved config, which reproduces the run.
  if (j.is_object() && j.contains("format") && j["format"] == "ads-manifest/1" && j.contains("config"))
    return config_from_json(j["config"]);
  return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
  const PhysicalParams& p = c.params;
  json params = {{"omega0", p.omega0},   {"delta", p.delta},     {"kappa", p.kappa},
                 {"waist_w", p.waist_w}, {"x_p", p.x_p},         {"x_s", p.x_s},
                 {"y_p", p.y_p},         {"y_s", p.y_s},         {"atom_mass_m", p.atom_mass_m},
                 {"a_s", p.a_s},         {"delta_t", p.delta_t}, {"n_atoms", p.n_atoms},
                 {"x0", p.x0},           {"delta_l", p.delta_l}, {"v0", p.v0}};
  if (c.scenario == Scenario::custom) {
    params["initial_level"] = p.initial_level == Level::one ? 1 : 3;
    params["initial_direction"] = p.initial_direction == Direction::positive ? "positive" : "negative";
  }
  return {
      {"preset", to_string(c.preset)},
      {"scenario", to_string(c.scenario)},
      {"params", params},
      {"model",
       {{"detuning_placement", to_string(c.model.detuning_placement)},
        {"cavity_ordering", to_string(c.model.cavity_ordering)},
        {"nonlinearity", c.model.nonlinearity_on},
        {"kinetic", c.model.kinetic_on}}},
      {"grid",
       {{"x_min_um", c.grid.x_min},
        {"x_max_um", c.grid.x_max},
        {"n_points", optional_json(c.grid.n_points)},
        {"frame", to_string(c.grid.frame)}}},
      {"time",
       {{"dt_ms", optional_json(c.time.dt)},
        {"t_final_ms", optional_json(c.time.t_final)},
        {"sample_every", optional_json(c.time.sample_every)}}},
      {"ensemble",
       {{"n_traj", optional_json(c.ensemble.n_traj)},
        {"base_seed", c.ensemble.base_seed},
        {"share_prefix", c.ensemble.share_prefix},
        {"checkpoint_budget_mb", c.ensemble.checkpoint_budget_mb}}},
      {"absorber",
       {{"enabled", c.absorber.enabled},
        {"width_um", c.absorber.width},
        {"gamma_max_per_ms", optional_json(c.absorber.gamma_max)}}},
      {"outputs",
       {{"directory", c.outputs.directory},
        {"snapshot_times_ms", c.outputs.snapshot_times},
        {"emit_densities", c.outputs.emit_densities}}},
      {"convergence",
       {{"enabled", c.convergence.enabled}, {"refinements", c.convergence.refinements}}},
      {"detector_um", c.detector},
  };
}

ResolvedRun resolve(const RunConfig& in) {
  ResolvedRun r;
  r.config = in;
  RunConfig& c = r.config;
  try {
    validate(c.params);
    r.derived = nondimensionalize(c.params);
  } catch (const ValidationError& e) {
    throw ValidationError("params." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  const DerivedParams& d = r.derived;
  if (!(std::abs(d.v0) > 0.0)) fail("params.v0", "must be non-zero");
  r.travel = d.initial_direction;
  const PresetDefaults defaults = preset_defaults(c.preset);

  if (!(c.grid.x_max > c.grid.x_min)) fail("grid.x_max_um", "must exceed x_min_um");
  if (c.grid.frame == Frame::automatic)
    c.grid.frame = r.travel == Direction::positive ? Frame::co_moving : Frame::lab;
  const double k_offset = c.grid.frame == Frame::co_moving ? d.k0 : 0.0;
  if (!c.grid.n_points) {
    const double length = c.grid.x_max - c.grid.x_min;
    const double dx_floor = 800.0 / static_cast<double>(defaults.min_points);
    c.grid.n_points = std::max(next_pow2(length / dx_floor),
                               required_points(c.grid.x_min, c.grid.x_max, d.k0, d.delta_l, k_offset));
  }
  r.grid = Grid::make(c.grid.x_min, c.grid.x_max, *c.grid.n_points, k_offset);

  if (!c.time.dt) {
    double dt = defaults.dt;
    if (d.kappa > 0.0) dt = std::min(dt, 0.1 / d.kappa);
    c.time.dt = dt;
  }
  if (!(*c.time.dt > 0.0)) fail("time.dt_ms", "must be positive");
  if (d.kappa * *c.time.dt > 0.1)
    fail("time.dt_ms", "kappa * dt = " + std::to_string(d.kappa * *c.time.dt) + " exceeds 0.1");
  if (!c.time.t_final) c.time.t_final = 2.0 * std::abs(d.x0) / std::abs(d.v0);
  if (!(*c.time.t_final > 0.0)) fail("time.t_final_ms", "must be positive");
  if (!c.time.sample_every) c.time.sample_every = defaults.sample_every;
  if (*c.time.sample_every == 0) fail("time.sample_every", "must be >= 1");
  if (!c.ensemble.n_traj) c.ensemble.n_traj = defaults.n_traj;
  if (*c.ensemble.n_traj == 0) fail("ensemble.n_traj", "must be >= 1");
  if (!c.absorber.gamma_max) c.absorber.gamma_max = 40.0 * std::abs(d.v0) / c.absorber.width;
  if (!(c.detector > 0.0)) fail("detector_um", "must be positive");
  if (c.convergence.refinements > 4) fail("convergence.refinements", "must be at most 4");
  for (std::size_t i = 0; i < c.outputs.snapshot_times.size(); ++i) {
    // A derived t_final can land a rounding error below the nominal end time.
    double& t = c.outputs.snapshot_times[i];
    if (t > *c.time.t_final && t <= *c.time.t_final * (1 + 1e-9)) t = *c.time.t_final;
    if (!(t >= 0.0 && t <= *c.time.t_final))
      fail("outputs.snapshot_times_ms[" + std::to_string(i) + "]", "must lie in [0, t_final]");
  }

  r.initial = std::make_shared<const SpinorField>(build_initial_state(r.grid, d));
  r.plan = make_step_plan(r.grid, d, c.model, *c.time.dt, *c.time.t_final);
  r.absorber = {c.absorber.enabled, c.absorber.width, *c.absorber.gamma_max};
  if (r.absorber.enabled) {
    try {
      attach_absorber(r.plan, r.absorber);
    } catch (const ValidationError& e) {
      const std::string key = e.field() == "absorber.gamma_max" ? "absorber.gamma_max_per_ms"
                                                                : "absorber.width_um";
      throw ValidationError(key, std::string(e.what()).substr(e.field().size() + 2));
    }
  }
  return r;
}

}  // namespace ads
