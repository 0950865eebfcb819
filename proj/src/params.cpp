#include "ads/params.hpp"

#include <cmath>
#include <iostream>

namespace ads {

namespace {

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ValidationError(field, "must be positive and finite");
}

void require_finite(double value, const char* field) {
  if (!std::isfinite(value)) throw ValidationError(field, "must be finite");
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void validate(const PhysicalParams& p) {
  require_positive(p.omega0, "omega0");
  require_finite(p.delta, "delta");
  if (!(p.kappa >= 0.0) || !std::isfinite(p.kappa))
    throw ValidationError("kappa", "must be non-negative and finite");
  require_positive(p.waist_w, "waist_w");
  require_finite(p.x_p, "x_p");
  require_finite(p.x_s, "x_s");
  require_finite(p.y_p, "y_p");
  require_finite(p.y_s, "y_s");
  require_positive(p.atom_mass_m, "atom_mass_m");
  if (!(p.a_s >= 0.0) || !std::isfinite(p.a_s))
    throw ValidationError("a_s", "must be non-negative and finite");
  require_positive(p.delta_t, "delta_t");
  if (p.n_atoms < 1) throw ValidationError("n_atoms", "must be at least 1");
  require_finite(p.x0, "x0");
  require_positive(p.delta_l, "delta_l");
  require_finite(p.v0, "v0");
}

bool has_mirror_geometry(const PhysicalParams& p) {
  return close_rel(p.x_p, -p.y_s, 1e-9) && close_rel(p.x_s, -p.y_p, 1e-9);
}

double interaction_strength_si(const PhysicalParams& p) {
  return 2.0 * kHbar * kHbar * p.a_s / (p.atom_mass_m * p.delta_t * p.delta_t);
}

double slow_tail_speed(const DerivedParams& d) {
  const double sigma_v = d.hbar_over_m / (std::sqrt(2.0) * d.delta_l);
  const double mu = d.un_product / (std::sqrt(kPi) * d.delta_l);
  return std::abs(d.v0) - 3.0 * sigma_v - std::sqrt(2.0 * mu * d.hbar_over_m);
}

DerivedParams nondimensionalize(const PhysicalParams& p) {
  validate(p);
  if (!has_mirror_geometry(p))
    std::cerr << "warning: pulse layout is not mirror symmetric (x_p != -y_s or x_s != -y_p)\n";

  const double L = kUnitLength;
  const double T = kUnitTime;
  DerivedParams d{};
  d.omega0 = p.omega0 * T;
  d.delta = p.delta * T;
  d.kappa = p.kappa * T;
  d.waist_w = p.waist_w / L;
  d.x_p = p.x_p / L;
  d.x_s = p.x_s / L;
  d.y_p = p.y_p / L;
  d.y_s = p.y_s / L;
  d.hbar_over_m = kHbar / p.atom_mass_m * T / (L * L);
  d.a_s = p.a_s / L;
  d.delta_t = p.delta_t / L;
  d.n_atoms = p.n_atoms;
  d.interaction_u = 2.0 * d.hbar_over_m * d.a_s / (d.delta_t * d.delta_t);
  d.un_product = d.interaction_u * static_cast<double>(d.n_atoms);
  d.delta_l = p.delta_l / L;
  d.x0 = p.x0 / L;
  d.v0 = p.v0 * T / L;
  const double sign = p.initial_direction == Direction::positive ? 1.0 : -1.0;
  d.x0_initial = sign * d.x0;
  d.v0_initial = sign * d.v0;
  d.k0 = d.v0_initial / d.hbar_over_m;
  d.initial_level = p.initial_level;
  d.initial_direction = p.initial_direction;
  return d;
}

PhysicalParams redimensionalize(const DerivedParams& d) {
  const double L = d.unit_length;
  const double T = d.unit_time;
  PhysicalParams p;
  p.omega0 = d.omega0 / T;
  p.delta = d.delta / T;
  p.kappa = d.kappa / T;
  p.waist_w = d.waist_w * L;
  p.x_p = d.x_p * L;
  p.x_s = d.x_s * L;
  p.y_p = d.y_p * L;
  p.y_s = d.y_s * L;
  p.atom_mass_m = kHbar / (d.hbar_over_m * L * L / T);
  p.a_s = d.a_s * L;
  p.delta_t = d.delta_t * L;
  p.n_atoms = d.n_atoms;
  p.x0 = d.x0 * L;
  p.delta_l = d.delta_l * L;
  p.v0 = d.v0 * L / T;
  p.initial_level = d.initial_level;
  p.initial_direction = d.initial_direction;
  return p;
}

PhysicalParams paper_default_params() {
  PhysicalParams p;
  p.n_atoms = 100000;
  p.delta_t = 3e-6;
  p.a_s = 5.77e-9;
  p.omega0 = 2.0 * kPi * 10.9e6;
  p.delta = 2.0 * kPi * 55e6;
  p.waist_w = 15e-6;
  p.kappa = 2.0 * kPi * 1.3e6;
  p.x_p = -130e-6;
  p.x_s = -160e-6;
  p.y_s = 130e-6;
  p.y_p = 160e-6;
  p.x0 = -260e-6;
  p.delta_l = 10e-6;
  p.v0 = 0.05;
  p.atom_mass_m = kRb87Mass;
  p.initial_level = Level::one;
  p.initial_direction = Direction::positive;
  return p;
}

PhysicalParams desk_scale_params() {
  PhysicalParams p = paper_default_params();
  p.omega0 *= kDeskFrequencyScale;
  p.delta *= kDeskFrequencyScale;
  p.kappa *= kDeskFrequencyScale;
  p.v0 *= kDeskVelocityScale;
  p.a_s *= kDeskScatteringScale;
  return p;
}

}  // namespace ads
