#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ads/field.hpp"
#include "ads/hamiltonian.hpp"
#include "ads/mcwf.hpp"
#include "ads/params.hpp"
#include "ads/propagator.hpp"

namespace ads {

enum class Preset { paper, desk };
enum class Scenario { forward_1, backward_1, backward_3, custom };

// lab keeps k = 0 at the centre of the momentum band. co_moving centres the
// band on k0, which only suits runs that never reflect. automatic picks
// co_moving for positive travel and lab otherwise.
enum class Frame { automatic, lab, co_moving };

struct GridConfig {
  double x_min = -400.0, x_max = 400.0;  // um
  std::optional<std::size_t> n_points;  // default: preset floor raised to the Nyquist minimum
  Frame frame = Frame::automatic;
};

struct TimeConfig {
  std::optional<double> dt;                // ms; default: preset step capped at kappa dt = 0.1
  std::optional<double> t_final;           // ms; default: 2 |x0| / |v0|
  std::optional<std::size_t> sample_every; // steps
};

struct EnsembleConfig {
  std::optional<std::size_t> n_traj;
  std::uint64_t base_seed = 1;
  bool share_prefix = true;
  std::size_t checkpoint_budget_mb = 256;
};

struct AbsorberConfig {
  bool enabled = true;
  double width = 70.0;               // um
  std::optional<double> gamma_max;   // 1/ms; default: 40 |v0| / width
};

struct OutputConfig {
  std::string directory = "ads_out";
  std::vector<double> snapshot_times;  // ms
  bool emit_densities = false;
};

// Deterministic no-jump reruns at dt / 2^r, r = 1..refinements, recorded in
// the manifest.
struct ConvergenceConfig {
  bool enabled = true;
  std::size_t refinements = 1;
};

struct RunConfig {
  Preset preset = Preset::desk;
  Scenario scenario = Scenario::forward_1;
  PhysicalParams params;
  ModelOptions model;
  GridConfig grid;
  TimeConfig time;
  EnsembleConfig ensemble;
  AbsorberConfig absorber;
  OutputConfig outputs;
  ConvergenceConfig convergence;
  double detector = kDefaultDetector;  // um
};

std::string to_string(Preset p);
std::string to_string(Scenario s);
std::string to_string(Frame f);
Scenario scenario_from_string(const std::string& s);  // ValidationError("scenario") if unknown
Preset preset_from_string(const std::string& s);

// Preset parameters with the scenario's level and direction applied.
RunConfig preset_config(Preset preset, Scenario scenario);

// Sets initial level and direction for the non-custom scenarios.
void apply_scenario(RunConfig& c, Scenario s);

// Parses a config document: "preset" and "scenario" select the base, every
// other section overrides it. Unknown keys and wrong types raise
// ValidationError naming the dotted path.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Full document; config_from_json(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const RunConfig& c);

// Every default filled in and validated, plus the objects a run needs.
struct ResolvedRun {
  RunConfig config;  // no empty optionals left
  DerivedParams derived;
  std::shared_ptr<const Grid> grid;
  StepPlan plan;
  AbsorberSpec absorber;
  Direction travel = Direction::positive;
  std::shared_ptr<const SpinorField> initial;
};

// Throws ValidationError (bad values), NyquistViolation or DomainTooSmall.
ResolvedRun resolve(const RunConfig& c);

// Preset defaults exposed for documentation and tests.
struct PresetDefaults {
  double dt;              // ms
  std::size_t sample_every;
  std::size_t n_traj;
  std::size_t min_points; // floor on the default domain
};
PresetDefaults preset_defaults(Preset p);

}  // namespace ads
