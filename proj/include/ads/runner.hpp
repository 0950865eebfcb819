#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ads/config.hpp"
#include "ads/mcwf.hpp"
#include "ads/output.hpp"
#include "ads/propagator.hpp"

namespace ads {

const char* version_string();

struct RunOptions {
  unsigned workers = 1;
  bool resume = false;
  bool write_outputs = true;
  double checkpoint_interval_s = 60.0;
  std::function<void(const EnsembleProgress&)> progress;
};

struct RunOutcome {
  ResolvedRun run;
  EnsembleResult result;
  ConvergenceReport convergence;  // empty when disabled
  double wall_seconds = 0;
  nlohmann::json manifest;
  std::vector<std::string> files;  // written, relative to the output directory
};

// Resolves, runs the ensemble, runs the convergence check and, when
// write_outputs is set, writes timeseries.csv, the snapshots and
// manifest.json into config.outputs.directory.
RunOutcome execute_run(const RunConfig& config, const RunOptions& options);

// Ensemble options derived from a resolved run (seed, cadence, snapshots, detector).
EnsembleOptions ensemble_options(const ResolvedRun& r, const RunOptions& options);

// Snapshot times actually used: the configured ones, or 51 evenly spaced
// times when densities are requested without explicit times.
std::vector<double> effective_snapshot_times(const RunConfig& resolved);

enum class SweepParam { v0, n_atoms };
SweepParam sweep_param_from_string(const std::string& s);
std::string to_string(SweepParam p);

// Returns a copy of the config with one swept value applied. v0 is given in
// cm/s (the magnitude; the scenario sets the sign), n_atoms as a count.
RunConfig with_swept_value(const RunConfig& base, SweepParam param, double value);

struct SweepOutcome {
  std::vector<SweepRow> rows;
  nlohmann::json manifest;
};

// One run per value, all with the base config's seed, each in its own
// subdirectory point_<index>. Failed points are recorded and the sweep goes
// on. Writes sweep.csv and manifest.json at the top of the output directory.
SweepOutcome execute_sweep(const RunConfig& base, SweepParam param,
                           const std::vector<double>& values, const RunOptions& options,
                           const std::function<void(std::size_t, const std::string&)>& on_point = {});

}  // namespace ads
