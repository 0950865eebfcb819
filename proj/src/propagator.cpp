#include "ads/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ads/fp_env.hpp"
#include "ads/observables.hpp"

namespace ads {

StepPlan make_step_plan(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                        const ModelOptions& opts, double dt, double t_final) {
  if (!(t_final > 0.0)) throw ValidationError("time.t_final", "must be positive");
  if (!(dt > 0.0)) throw ValidationError("time.dt", "must be positive");
  const double ratio = t_final / dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  if (n == 0) n = 1;
  StepPlan plan = make_step_plan(std::move(grid), p, opts, t_final / static_cast<double>(n));
  plan.n_steps = n;
  return plan;
}

StepPlan make_step_plan(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                        const ModelOptions& opts, double dt) {
  StepPlan plan;
  plan.grid = grid;
  plan.dt = dt;
  plan.n_steps = 0;
  plan.kinetic_on = opts.kinetic_on;
  plan.nonlinearity_prefactor = opts.nonlinearity_on ? p.un_product : 0.0;
  plan.kappa = p.kappa;
  plan.half_step = std::make_shared<HalfStepFactors>(precompute_half_step(*grid, p, opts, dt));
  plan.kinetic_phases.resize(grid->n_points);
  for (std::size_t j = 0; j < grid->n_points; ++j) {
    const double k = grid->k[j];
    plan.kinetic_phases[j] = std::polar(1.0, -0.5 * p.hbar_over_m * k * k * dt);
  }
  const double inv_n = 1.0 / static_cast<double>(grid->n_points);
  plan.kinetic_scaled.resize(grid->n_points);
  for (std::size_t j = 0; j < grid->n_points; ++j)
    plan.kinetic_scaled[j] = plan.kinetic_phases[j] * inv_n;
  plan.fft = batch_fft_for(grid->n_points);
  return plan;
}

AbsorbingMask make_absorbing_mask(const Grid& g, const AbsorberSpec& spec, double dt) {
  if (!(spec.width > 0.0)) throw ValidationError("absorber.width", "must be positive");
  if (!(spec.gamma_max >= 0.0)) throw ValidationError("absorber.gamma_max", "must be >= 0");
  if (2.0 * spec.width >= g.length())
    throw ValidationError("absorber.width", "layers overlap: width must be below half the domain");
  AbsorbingMask m;
  m.factor.assign(g.n_points, 1.0);
  m.inner_low = g.x_min + spec.width;
  m.inner_high = g.x_max - spec.width;
  m.low_end = 0;
  m.high_begin = g.n_points;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double x = g.x[j];
    double depth = 0.0;
    if (x < m.inner_low) {
      depth = m.inner_low - x;
      m.low_end = j + 1;
    } else if (x > m.inner_high) {
      depth = x - m.inner_high;
      m.high_begin = std::min(m.high_begin, j);
    }
    if (depth > 0.0) {
      const double s = std::sin(0.5 * kPi * depth / spec.width);
      m.factor[j] = std::exp(-spec.gamma_max * s * s * dt);
    }
  }
  return m;
}

void apply_absorber(SpinorField& f, const AbsorbingMask& mask, AbsorbedWeight& absorbed) {
  const std::size_t n = f.n_points();
  const double dx = f.grid().dx;
  for (std::size_t c = 0; c < kComponents; ++c) {
    cplx* comp = f.data() + c * n;
    double low = 0.0, high = 0.0;
    for (std::size_t j = 0; j < mask.low_end; ++j) {
      const double m = mask.factor[j];
      low += std::norm(comp[j]) * (1.0 - m * m);
      comp[j] *= m;
    }
    for (std::size_t j = mask.high_begin; j < n; ++j) {
      const double m = mask.factor[j];
      high += std::norm(comp[j]) * (1.0 - m * m);
      comp[j] *= m;
    }
    absorbed.low[c] += low * dx;
    absorbed.high[c] += high * dx;
  }
}

void attach_absorber(StepPlan& plan, const AbsorberSpec& spec) {
  if (!spec.enabled) {
    plan.absorber.reset();
    return;
  }
  plan.absorber = std::make_shared<AbsorbingMask>(make_absorbing_mask(*plan.grid, spec, plan.dt));
}

void apply_nonlinear_half_step(SpinorField& f, const StepPlan& plan) {
  if (plan.nonlinearity_prefactor == 0.0) return;
  const std::size_t n = f.n_points();
  const double* base = reinterpret_cast<const double*>(f.data());
  const double scale = -plan.nonlinearity_prefactor * 0.5 * plan.dt;

  thread_local std::vector<double> phase, c_re, c_im;
  phase.resize(n);
  c_re.resize(n);
  c_im.resize(n);
  double max_phase = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double density = 0.0;
    for (std::size_t c = 0; c < kComponents; ++c) {
      const double re = base[2 * (c * n + j)];
      const double im = base[2 * (c * n + j) + 1];
      density += re * re + im * im;
    }
    phase[j] = scale * density;
    max_phase = std::max(max_phase, std::abs(phase[j]));
  }
  if (max_phase < 0.05) {
    // Truncated series; remainder below 1e-19 for |phi| < 0.05.
    for (std::size_t j = 0; j < n; ++j) {
      const double p = phase[j];
      const double p2 = p * p;
      c_re[j] = 1.0 + p2 * (-1.0 / 2 + p2 * (1.0 / 24 + p2 * (-1.0 / 720 + p2 * (1.0 / 40320))));
      c_im[j] = p * (1.0 + p2 * (-1.0 / 6 + p2 * (1.0 / 120 + p2 * (-1.0 / 5040 + p2 / 362880))));
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      c_re[j] = std::cos(phase[j]);
      c_im[j] = std::sin(phase[j]);
    }
  }
  double* data = reinterpret_cast<double*>(f.data());
  for (std::size_t c = 0; c < kComponents; ++c) {
    double* comp = data + 2 * c * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double re = comp[2 * j], im = comp[2 * j + 1];
      comp[2 * j] = re * c_re[j] - im * c_im[j];
      comp[2 * j + 1] = re * c_im[j] + im * c_re[j];
    }
  }
}

void apply_kinetic_step(SpinorField& f, const StepPlan& plan) {
  if (!plan.kinetic_on) return;
  const std::size_t n = f.n_points();
  plan.fft->forward(f.data());
  cplx* base = f.data();
  for (std::size_t c = 0; c < kComponents; ++c) {
    cplx* comp = base + c * n;
    for (std::size_t j = 0; j < n; ++j) comp[j] *= plan.kinetic_scaled[j];
  }
  plan.fft->backward(f.data());
}

void strang_step(SpinorField& f, const StepPlan& plan) {
  plan.half_step->apply(f);
  apply_nonlinear_half_step(f, plan);
  apply_kinetic_step(f, plan);
  apply_nonlinear_half_step(f, plan);
  plan.half_step->apply(f);
}

namespace {

double l2_distance(const SpinorField& a, const SpinorField& b) {
  double sum = 0.0;
  const auto ra = a.raw();
  const auto rb = b.raw();
  for (std::size_t i = 0; i < ra.size(); ++i) sum += std::norm(ra[i] - rb[i]);
  return std::sqrt(sum * a.grid().dx);
}

}  // namespace

ConvergenceReport convergence_study(const SpinorField& initial, const DerivedParams& p,
                                    const ModelOptions& opts, double t_final,
                                    const std::vector<double>& dt_sequence) {
  if (dt_sequence.size() < 2)
    throw ValidationError("dt_sequence", "needs at least two entries");
  for (std::size_t i = 1; i < dt_sequence.size(); ++i)
    if (!(dt_sequence[i] < dt_sequence[i - 1]))
      throw ValidationError("dt_sequence", "must be strictly decreasing");

  ScopedFlushToZero ftz;
  ConvergenceReport report;
  std::vector<SpinorField> finals;
  for (double dt : dt_sequence) {
    const StepPlan plan = make_step_plan(initial.grid_ptr(), p, opts, dt, t_final);
    SpinorField f = initial;
    for (std::size_t s = 0; s < plan.n_steps; ++s) strang_step(f, plan);
    ConvergenceRow row;
    row.dt = plan.dt;
    const Populations pops = populations(f);
    row.p1 = pops.p1;
    row.p2 = pops.p2;
    row.p3 = pops.p3;
    row.xbar = mean_position_and_velocity(f, p.hbar_over_m).xbar;
    row.norm = norm2(f);
    report.rows.push_back(row);
    finals.push_back(std::move(f));
  }
  for (std::size_t i = 0; i + 1 < finals.size(); ++i)
    report.rows[i].diff_to_next = l2_distance(finals[i], finals[i + 1]);
  for (std::size_t i = 0; i + 2 < finals.size(); ++i) {
    const double a = report.rows[i].diff_to_next;
    const double b = report.rows[i + 1].diff_to_next;
    report.order_estimates.push_back(std::log2(a / b));
  }
  return report;
}

ConvergenceReport convergence_study(std::shared_ptr<const Grid> grid, const DerivedParams& p,
                                    const ModelOptions& opts, double t_final,
                                    const std::vector<double>& dt_sequence) {
  return convergence_study(build_initial_state(std::move(grid), p), p, opts, t_final,
                           dt_sequence);
}

}  // namespace ads
