#pragma once

#include <memory>
#include <vector>

#include "ads/field.hpp"
#include "ads/hamiltonian.hpp"
#include "ads/observables.hpp"
#include "ads/params.hpp"

namespace ads {

// Optional cosine-ramp absorbing layer at both domain edges. The damping rate
// rises as gamma_max sin^2(pi d / (2 width)) with depth d into the layer.
struct AbsorberSpec {
  bool enabled = false;
  double width = 70.0;     // um
  double gamma_max = 0.0;  // 1/ms
};

// Per-step transmission factors exp(-gamma(x) dt), 1 outside the layers.
struct AbsorbingMask {
  std::vector<double> factor;
  std::size_t low_end = 0;     // layer at the low edge is [0, low_end)
  std::size_t high_begin = 0;  // layer at the high edge is [high_begin, n)
  double inner_low = 0;        // inner edge positions, where absorbed weight is parked
  double inner_high = 0;
};

AbsorbingMask make_absorbing_mask(const Grid& g, const AbsorberSpec& spec, double dt);

// Damps the field inside the layers and adds the removed weight, per
// component, to the side tallies.
void apply_absorber(SpinorField& f, const AbsorbingMask& mask, AbsorbedWeight& absorbed);

// Everything a worker needs to advance one spinor by dt. Shared read-only.
struct StepPlan {
  std::shared_ptr<const Grid> grid;
  double dt = 0;
  std::size_t n_steps = 0;
  std::vector<cplx> kinetic_phases;  // exp(-i (hbar/m) k^2 dt / 2), FFT order
  std::vector<cplx> kinetic_scaled;  // kinetic_phases / n_points (absorbs the inverse-FFT scale)
  std::shared_ptr<const HalfStepFactors> half_step;
  double nonlinearity_prefactor = 0;  // U N, zero when the nonlinearity is off
  double kappa = 0;                   // 1/ms, for the jump bookkeeping
  bool kinetic_on = true;
  std::shared_ptr<const BatchFft> fft;
  std::shared_ptr<const AbsorbingMask> absorber;  // null when disabled
};

// Builds a plan whose n_steps * dt reproduces t_final to 1e-12 relative; dt is
// shrunk slightly if t_final is not an integer multiple of the requested step.
StepPlan make_step_plan(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                        const ModelOptions& opts, double dt, double t_final);

// Same generator with a different dt (reuses nothing; factors are rebuilt).
StepPlan make_step_plan(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                        const ModelOptions& opts, double dt);

// Attaches an absorbing layer built for the plan's grid and dt.
void attach_absorber(StepPlan& plan, const AbsorberSpec& spec);

// Strang step: half coupling/decay, half nonlinear phase, kinetic, half
// nonlinear phase (density re-evaluated), half coupling/decay. The norm is
// not restored and the absorber is not applied.
void strang_step(SpinorField& f, const StepPlan& plan);

void apply_nonlinear_half_step(SpinorField& f, const StepPlan& plan);
void apply_kinetic_step(SpinorField& f, const StepPlan& plan);

// Observables of a deterministic run at one dt, used by convergence_study.
struct ConvergenceRow {
  double dt = 0;
  double p1 = 0, p2 = 0, p3 = 0;
  double xbar = 0;
  double norm = 0;
  double diff_to_next = 0;  // ||psi(dt) - psi(next dt)||, 0 for the last row
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  // log2 of successive difference ratios, one per consecutive triple; assumes
  // each dt is half the previous one.
  std::vector<double> order_estimates;
};

// Deterministic (no jumps, no renormalisation) evolution of the initial state
// to t_final for each dt in a strictly decreasing sequence.
ConvergenceReport convergence_study(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                                    const ModelOptions& opts, double t_final,
                                    const std::vector<double>& dt_sequence);

// Variant starting from an explicit state.
ConvergenceReport convergence_study(const SpinorField& initial, const DerivedParams& p,
                                    const ModelOptions& opts, double t_final,
                                    const std::vector<double>& dt_sequence);

}  // namespace ads
