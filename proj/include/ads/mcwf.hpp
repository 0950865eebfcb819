#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ads/field.hpp"
#include "ads/observables.hpp"
#include "ads/propagator.hpp"

namespace ads {

// splitmix64 finaliser: z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
// z *= 0x94D049BB133111EB; z ^= z >> 31.
std::uint64_t mix64(std::uint64_t z);

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Seed of trajectory i: mix64(base_seed + (i + 1) * kGolden).
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

// Counter-based stream: draw number k of a stream is
// (mix64(stream + (k + 1) * kGolden) >> 11) * 2^-53, uniform in [0, 1).
double uniform_draw(std::uint64_t stream, std::uint64_t counter);

class EmptyPhotonSector : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrajectoryFailure : public std::runtime_error {
 public:
  TrajectoryFailure(std::size_t index, const std::string& what)
      : std::runtime_error("trajectory " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// One quantum trajectory. The field norm plus the absorbed tallies is one
// after every step; without an absorber the field norm itself is one.
struct TrajectoryState {
  SpinorField field;
  double time = 0;
  std::size_t step = 0;
  std::uint64_t rng_stream = 0;
  std::vector<double> jump_log;
  AbsorbedWeight absorbed;
};

TrajectoryState make_trajectory(SpinorField initial, std::uint64_t rng_stream,
                                const StepPlan& plan);

struct StepOutcome {
  double jump_probability = 0;
  bool jumped = false;
};

// Strang step, jump test against draw number `step` of the trajectory's
// stream with probability equal to the norm lost in the step, renormalisation,
// then the absorber. Throws if kappa dt > 0.1 is implied by the plan.
StepOutcome mcwf_step(TrajectoryState& s, const StepPlan& plan);

// Same step with the jump branch suppressed; used to build the shared
// no-jump path. Bit-identical to mcwf_step whenever that step does not jump.
StepOutcome no_jump_step(TrajectoryState& s, const StepPlan& plan);

// psi_{i,0} <- psi_{i,1}, psi_{i,1} <- 0, then renormalise to one.
void apply_jump(SpinorField& f);

// Jump on a trajectory: the field and the absorbed tallies both lose their
// photon-zero part and the total is renormalised to one.
void apply_jump(TrajectoryState& s);

struct EnsembleProgress {
  std::size_t done = 0;
  std::size_t total = 0;
  std::size_t shared_steps = 0;  // steps of the shared no-jump path so far
  std::size_t shared_total = 0;
};

struct EnsembleOptions {
  std::size_t n_traj = 1;
  std::uint64_t base_seed = 0;
  std::size_t sample_every = 100;
  std::vector<double> snapshot_times;  // ms; rounded to the nearest step
  unsigned workers = 1;
  bool share_prefix = true;
  std::size_t checkpoint_budget_mb = 256;
  double x_det = kDefaultDetector;
  Direction travel = Direction::positive;
  // Resumable reducer state. Empty path disables checkpointing.
  std::string checkpoint_path;
  std::string checkpoint_fingerprint;
  double checkpoint_interval_s = 60.0;
  bool resume = false;
  std::function<void(const EnsembleProgress&)> progress;
};

struct MeanSeries {
  std::vector<double> mean;
  std::vector<double> se;
};

struct DensitySnapshotMean {
  double t = 0;
  std::vector<double> densities;  // [6][n_points], ensemble mean
};

struct EnsembleResult {
  std::size_t n_traj = 0;
  std::vector<double> time_grid;
  MeanSeries p1, p2, p3, xbar, v, photon, dark_pop, norm;
  std::vector<double> v_fd;  // finite difference of mean xbar
  std::vector<DensitySnapshotMean> snapshots;
  double transmission = 0, transmission_se = 0;
  double reflection = 0;
  double final_p1 = 0, final_p3 = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> jump_logs;
  std::vector<std::size_t> jump_histogram;  // [jumps per trajectory] -> count
  std::size_t total_jumps = 0;
  double jumps_mean = 0;
  std::size_t resumed_from = 0;  // trajectories restored from a checkpoint
};

// Runs n_traj trajectories from `initial` over plan.n_steps steps and reduces
// them in trajectory-index order, so the result does not depend on the
// worker count. With share_prefix the common no-jump path is computed once;
// each trajectory restarts from the nearest stored state before its first
// jump, which gives bit-identical results to running it alone.
EnsembleResult run_ensemble(const SpinorField& initial, const StepPlan& plan,
                            const DerivedParams& p, const ModelOptions& opts,
                            const EnsembleOptions& eo);

// Central-difference derivative of a sampled series, one-sided at the ends.
std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace ads
