#include "ads/mcwf.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "ads/fp_env.hpp"

namespace ads {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(base_seed + (index + 1) * kGolden);
}

double uniform_draw(std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(mix64(stream + (counter + 1) * kGolden) >> 11) * 0x1.0p-53;
}

namespace {

void check_jump_resolution(const StepPlan& plan) {
  if (plan.kappa * plan.dt > 0.1)
    throw ValidationError("time.dt", "kappa * dt = " + std::to_string(plan.kappa * plan.dt) +
                                         " exceeds 0.1; at most one jump per step is tested");
}

StepOutcome advance(TrajectoryState& s, const StepPlan& plan, bool allow_jump) {
  const double before = 1.0 - s.absorbed.total();
  strang_step(s.field, plan);
  const double after = norm2(s.field);
  StepOutcome out;
  if (plan.kappa > 0.0) out.jump_probability = std::max(0.0, before - after);
  const std::uint64_t draw = s.step;
  ++s.step;
  s.time = static_cast<double>(s.step) * plan.dt;
  if (allow_jump && out.jump_probability > 0.0 &&
      uniform_draw(s.rng_stream, draw) < out.jump_probability) {
    apply_jump(s);
    s.jump_log.push_back(s.time);
    out.jumped = true;
  } else if (after > 0.0) {
    s.field.scale(std::sqrt(before / after));
  }
  if (plan.absorber) apply_absorber(s.field, *plan.absorber, s.absorbed);
  return out;
}

}  // namespace

TrajectoryState make_trajectory(SpinorField initial, std::uint64_t rng_stream,
                                const StepPlan& plan) {
  TrajectoryState s{std::move(initial), 0.0, 0, rng_stream, {}, {}};
  if (plan.absorber) {
    s.absorbed.park_low = plan.absorber->inner_low;
    s.absorbed.park_high = plan.absorber->inner_high;
  }
  return s;
}

StepOutcome mcwf_step(TrajectoryState& s, const StepPlan& plan) {
  check_jump_resolution(plan);
  return advance(s, plan, true);
}

StepOutcome no_jump_step(TrajectoryState& s, const StepPlan& plan) {
  check_jump_resolution(plan);
  return advance(s, plan, false);
}

namespace {

double photon_weight(const SpinorField& f) {
  double w = 0.0;
  for (int level = 1; level <= 3; ++level) w += component_norm2(f, component_index(level, 1));
  return w;
}

void lower_photon(SpinorField& f) {
  for (int level = 1; level <= 3; ++level) {
    auto zero = f.component(component_index(level, 0));
    auto one = f.component(component_index(level, 1));
    std::copy(one.begin(), one.end(), zero.begin());
    std::fill(one.begin(), one.end(), cplx{0.0, 0.0});
  }
}

}  // namespace

void apply_jump(SpinorField& f) {
  const double w = photon_weight(f);
  if (!(w >= 1e-300)) throw EmptyPhotonSector("jump drawn with an empty photon-one sector");
  lower_photon(f);
  f.scale(1.0 / std::sqrt(w));
}

void apply_jump(TrajectoryState& s) {
  double w = photon_weight(s.field);
  for (int level = 1; level <= 3; ++level) w += s.absorbed.component(component_index(level, 1));
  if (!(w >= 1e-300)) throw EmptyPhotonSector("jump drawn with an empty photon-one sector");
  lower_photon(s.field);
  for (auto* side : {&s.absorbed.low, &s.absorbed.high}) {
    for (int level = 1; level <= 3; ++level) {
      (*side)[component_index(level, 0)] = (*side)[component_index(level, 1)];
      (*side)[component_index(level, 1)] = 0.0;
    }
  }
  s.field.scale(1.0 / std::sqrt(w));
  s.absorbed.scale(1.0 / w);
}

std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (y[1] - y[0]) / (t[1] - t[0]);
  d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
  return d;
}

namespace {

struct Schedule {
  std::vector<std::size_t> sample_steps;
  std::vector<std::size_t> snapshot_steps;
};

Schedule make_schedule(const StepPlan& plan, const EnsembleOptions& eo) {
  if (eo.sample_every == 0) throw ValidationError("time.sample_every", "must be >= 1");
  Schedule s;
  for (std::size_t k = 0; k < plan.n_steps; k += eo.sample_every) s.sample_steps.push_back(k);
  s.sample_steps.push_back(plan.n_steps);
  for (double t : eo.snapshot_times) {
    if (!(t >= 0.0)) throw ValidationError("outputs.snapshot_times", "must be >= 0");
    const double k = std::round(t / plan.dt);
    s.snapshot_steps.push_back(
        std::min(plan.n_steps, static_cast<std::size_t>(std::max(0.0, k))));
  }
  std::sort(s.snapshot_steps.begin(), s.snapshot_steps.end());
  s.snapshot_steps.erase(std::unique(s.snapshot_steps.begin(), s.snapshot_steps.end()),
                         s.snapshot_steps.end());
  return s;
}

struct Outcome {
  std::vector<ObservableSample> samples;
  std::vector<std::vector<double>> snapshots;
  std::vector<double> jumps;
  SideWeights sides;
};

struct Context {
  const StepPlan& plan;
  const DerivedParams& p;
  const ModelOptions& opts;
  const EnsembleOptions& eo;
  const Schedule& schedule;
};

void record(const Context& c, const TrajectoryState& s, Outcome& out) {
  const auto& ss = c.schedule.sample_steps;
  auto it = std::lower_bound(ss.begin(), ss.end(), s.step);
  if (it != ss.end() && *it == s.step)
    out.samples[static_cast<std::size_t>(it - ss.begin())] =
        sample_observables(s.field, s.absorbed, s.time, c.p, c.opts);
  const auto& sn = c.schedule.snapshot_steps;
  auto jt = std::lower_bound(sn.begin(), sn.end(), s.step);
  if (jt != sn.end() && *jt == s.step)
    out.snapshots[static_cast<std::size_t>(jt - sn.begin())] = component_densities(s.field);
}

struct Checkpoints {
  std::size_t stride = 1;
  std::vector<TrajectoryState> states;
};

// Evolves to the end of the plan, recording every scheduled step after the
// current one. With probabilities/checkpoints set, this is the shared path.
void evolve(const Context& c, TrajectoryState& s, Outcome& out, bool allow_jump,
            std::vector<double>* probabilities, Checkpoints* checkpoints,
            const std::function<void(std::size_t)>& tick = {}) {
  while (s.step < c.plan.n_steps) {
    if (checkpoints && s.step % checkpoints->stride == 0) checkpoints->states.push_back(s);
    const StepOutcome o = advance(s, c.plan, allow_jump);
    if (probabilities) (*probabilities)[s.step] = o.jump_probability;
    record(c, s, out);
    if (tick && s.step % 1000 == 0) tick(s.step);
  }
  out.jumps = s.jump_log;
  out.sides = partition(s.field, s.absorbed, c.eo.travel, c.eo.x_det);
}

Outcome empty_outcome(const Schedule& sch) {
  Outcome o;
  o.samples.resize(sch.sample_steps.size());
  o.snapshots.resize(sch.snapshot_steps.size());
  return o;
}

// Shifted sums: mean = shift + sum / n, which is exactly the shift when
// every trajectory agrees with the first one.
struct Accumulator {
  std::vector<double> shift, sum, sum2;

  void resize(std::size_t n) {
    shift.assign(n, 0.0);
    sum.assign(n, 0.0);
    sum2.assign(n, 0.0);
  }
  void add(std::size_t i, double value, bool first) {
    if (first) shift[i] = value;
    const double d = value - shift[i];
    sum[i] += d;
    sum2[i] += d * d;
  }
  double mean(std::size_t i, std::size_t n) const {
    return shift[i] + sum[i] / static_cast<double>(n);
  }
  double se(std::size_t i, std::size_t n) const {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double var = std::max(0.0, (sum2[i] - sum[i] * sum[i] / nn) / (nn - 1.0));
    return std::sqrt(var / nn);
  }
};

constexpr std::size_t kSeriesCount = 8;

double series_value(const ObservableSample& s, std::size_t k) {
  switch (k) {
    case 0: return s.p1;
    case 1: return s.p2;
    case 2: return s.p3;
    case 3: return s.xbar;
    case 4: return s.v;
    case 5: return s.photon_number;
    case 6: return s.dark_pop;
    default: return s.norm;
  }
}

struct Reducer {
  std::size_t count = 0;
  std::array<Accumulator, kSeriesCount> series;
  Accumulator transmission, reflection;
  std::vector<Accumulator> snapshots;
  std::vector<std::vector<double>> jump_logs;
  std::vector<double> times;

  void init(const Schedule& sch, std::size_t n_points) {
    for (auto& a : series) a.resize(sch.sample_steps.size());
    transmission.resize(1);
    reflection.resize(1);
    snapshots.resize(sch.snapshot_steps.size());
    for (auto& a : snapshots) a.resize(kComponents * n_points);
  }

  void add(const Outcome& o) {
    const bool first = count == 0;
    if (first) {
      times.clear();
      for (const auto& s : o.samples) times.push_back(s.t);
    }
    for (std::size_t i = 0; i < o.samples.size(); ++i)
      for (std::size_t k = 0; k < kSeriesCount; ++k)
        series[k].add(i, series_value(o.samples[i], k), first);
    transmission.add(0, o.sides.transmitted, first);
    reflection.add(0, o.sides.reflected, first);
    for (std::size_t s = 0; s < o.snapshots.size(); ++s)
      for (std::size_t j = 0; j < o.snapshots[s].size(); ++j)
        snapshots[s].add(j, o.snapshots[s][j], first);
    jump_logs.push_back(o.jumps);
    ++count;
  }
};

// Reducer persistence: raw little-endian doubles behind a fingerprint line.
void write_vec(std::ostream& os, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_vec(std::istream& is) {
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!is || n > (std::uint64_t{1} << 34)) throw std::runtime_error("corrupt checkpoint");
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("corrupt checkpoint");
  return v;
}

void write_acc(std::ostream& os, const Accumulator& a) {
  write_vec(os, a.shift);
  write_vec(os, a.sum);
  write_vec(os, a.sum2);
}

void read_acc(std::istream& is, Accumulator& a) {
  a.shift = read_vec(is);
  a.sum = read_vec(is);
  a.sum2 = read_vec(is);
}

void save_reducer(const std::string& path, const std::string& fingerprint, const Reducer& r) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + tmp);
    os << "ADSC1\n" << fingerprint << '\n';
    const std::uint64_t count = r.count;
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const auto& a : r.series) write_acc(os, a);
    write_acc(os, r.transmission);
    write_acc(os, r.reflection);
    for (const auto& a : r.snapshots) write_acc(os, a);
    for (const auto& log : r.jump_logs) write_vec(os, log);
    write_vec(os, r.times);
  }
  std::filesystem::rename(tmp, path);
}

bool load_reducer(const std::string& path, const std::string& fingerprint, Reducer& r) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::string magic, fp;
  std::getline(is, magic);
  std::getline(is, fp);
  if (magic != "ADSC1" || fp != fingerprint) return false;
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  Reducer loaded = r;
  loaded.count = count;
  for (auto& a : loaded.series) read_acc(is, a);
  read_acc(is, loaded.transmission);
  read_acc(is, loaded.reflection);
  for (auto& a : loaded.snapshots) read_acc(is, a);
  loaded.jump_logs.clear();
  for (std::uint64_t i = 0; i < count; ++i) loaded.jump_logs.push_back(read_vec(is));
  loaded.times = read_vec(is);
  if (loaded.series[0].sum.size() != r.series[0].sum.size() ||
      loaded.snapshots.size() != r.snapshots.size())
    return false;
  r = std::move(loaded);
  return true;
}

// First step whose draw falls below that step's jump probability on the
// shared path, or 0 if the trajectory never jumps.
std::size_t first_jump_step(std::uint64_t stream, const std::vector<double>& probabilities) {
  for (std::size_t k = 1; k < probabilities.size(); ++k) {
    const double pk = probabilities[k];
    if (pk > 0.0 && uniform_draw(stream, k - 1) < pk) return k;
  }
  return 0;
}

}  // namespace

EnsembleResult run_ensemble(const SpinorField& initial, const StepPlan& plan,
                            const DerivedParams& p, const ModelOptions& opts,
                            const EnsembleOptions& eo) {
  if (eo.n_traj == 0) throw ValidationError("ensemble.n_traj", "must be >= 1");
  if (plan.n_steps == 0) throw ValidationError("time.t_final", "plan has no steps");
  check_jump_resolution(plan);
  ScopedFlushToZero ftz;

  const Schedule schedule = make_schedule(plan, eo);
  const Context ctx{plan, p, opts, eo, schedule};
  const std::size_t n = eo.n_traj;

  Reducer reducer;
  reducer.init(schedule, initial.n_points());
  std::size_t resumed = 0;
  if (eo.resume && !eo.checkpoint_path.empty() &&
      load_reducer(eo.checkpoint_path, eo.checkpoint_fingerprint, reducer)) {
    resumed = std::min(reducer.count, n);
  }

  EnsembleProgress progress{resumed, n, 0, plan.n_steps};
  auto report = [&] {
    if (eo.progress) eo.progress(progress);
  };

  // Shared no-jump path.
  std::vector<double> probabilities;
  Checkpoints checkpoints;
  Outcome shared = empty_outcome(schedule);
  const bool share = eo.share_prefix && resumed < n;
  if (share) {
    probabilities.assign(plan.n_steps + 1, 0.0);
    const std::size_t bytes = kComponents * initial.n_points() * sizeof(cplx) + 256;
    const std::size_t budget = std::max<std::size_t>(1, eo.checkpoint_budget_mb << 20);
    const std::size_t count = std::max<std::size_t>(1, budget / bytes);
    checkpoints.stride = std::max<std::size_t>(1, (plan.n_steps + count - 1) / count);
    TrajectoryState s = make_trajectory(initial, 0, plan);
    record(ctx, s, shared);
    evolve(ctx, s, shared, false, &probabilities, &checkpoints, [&](std::size_t step) {
      progress.shared_steps = step;
      report();
    });
    progress.shared_steps = plan.n_steps;
  }

  auto run_one = [&](std::size_t index) -> Outcome {
    const std::uint64_t stream = trajectory_seed(eo.base_seed, index);
    if (!share) {
      Outcome out = empty_outcome(schedule);
      TrajectoryState s = make_trajectory(initial, stream, plan);
      record(ctx, s, out);
      evolve(ctx, s, out, true, nullptr, nullptr);
      return out;
    }
    const std::size_t k = first_jump_step(stream, probabilities);
    if (k == 0) return shared;
    Outcome out = shared;
    TrajectoryState s = checkpoints.states[(k - 1) / checkpoints.stride];
    s.rng_stream = stream;
    evolve(ctx, s, out, true, nullptr, nullptr);
    return out;
  };

  std::mutex mutex;
  std::map<std::size_t, Outcome> pending;
  std::size_t next_reduce = resumed;
  std::atomic<std::size_t> next_index{resumed};
  std::atomic<bool> stop{false};
  std::map<std::size_t, std::string> failures;
  auto last_save = std::chrono::steady_clock::now();

  auto worker = [&] {
    ScopedFlushToZero guard;
    for (;;) {
      if (stop.load()) return;
      const std::size_t index = next_index.fetch_add(1);
      if (index >= n) return;
      try {
        Outcome out = run_one(index);
        std::lock_guard lock(mutex);
        pending.emplace(index, std::move(out));
        while (!pending.empty() && pending.begin()->first == next_reduce) {
          reducer.add(pending.begin()->second);
          pending.erase(pending.begin());
          ++next_reduce;
          progress.done = next_reduce;
          report();
        }
        const auto now = std::chrono::steady_clock::now();
        if (!eo.checkpoint_path.empty() &&
            std::chrono::duration<double>(now - last_save).count() >= eo.checkpoint_interval_s) {
          save_reducer(eo.checkpoint_path, eo.checkpoint_fingerprint, reducer);
          last_save = now;
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        failures.emplace(index, e.what());
        stop.store(true);
        return;
      }
    }
  };

  const unsigned n_workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(eo.workers, n)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!failures.empty())
    throw TrajectoryFailure(failures.begin()->first, failures.begin()->second);

  EnsembleResult r;
  r.n_traj = n;
  r.resumed_from = resumed;
  r.time_grid = reducer.times;
  const std::size_t ns = schedule.sample_steps.size();
  std::array<MeanSeries*, kSeriesCount> outs{&r.p1, &r.p2, &r.p3, &r.xbar,
                                             &r.v, &r.photon, &r.dark_pop, &r.norm};
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    outs[k]->mean.resize(ns);
    outs[k]->se.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      outs[k]->mean[i] = reducer.series[k].mean(i, n);
      outs[k]->se[i] = reducer.series[k].se(i, n);
    }
  }
  r.v_fd = finite_difference(r.time_grid, r.xbar.mean);
  for (std::size_t s = 0; s < schedule.snapshot_steps.size(); ++s) {
    DensitySnapshotMean snap;
    snap.t = static_cast<double>(schedule.snapshot_steps[s]) * plan.dt;
    const auto& a = reducer.snapshots[s];
    snap.densities.resize(a.sum.size());
    for (std::size_t j = 0; j < a.sum.size(); ++j) snap.densities[j] = a.mean(j, n);
    r.snapshots.push_back(std::move(snap));
  }
  r.transmission = reducer.transmission.mean(0, n);
  r.transmission_se = reducer.transmission.se(0, n);
  r.reflection = reducer.reflection.mean(0, n);
  r.final_p1 = r.p1.mean.back();
  r.final_p3 = r.p3.mean.back();
  for (std::size_t i = 0; i < n; ++i) r.seeds.push_back(trajectory_seed(eo.base_seed, i));
  r.jump_logs = std::move(reducer.jump_logs);
  for (const auto& log : r.jump_logs) {
    if (r.jump_histogram.size() <= log.size()) r.jump_histogram.resize(log.size() + 1, 0);
    ++r.jump_histogram[log.size()];
    r.total_jumps += log.size();
  }
  r.jumps_mean = static_cast<double>(r.total_jumps) / static_cast<double>(n);
  if (!eo.checkpoint_path.empty()) std::filesystem::remove(eo.checkpoint_path);
  return r;
}

}  // namespace ads
