#pragma once

#include <array>

#include "ads/field.hpp"
#include "ads/hamiltonian.hpp"
#include "ads/params.hpp"

namespace ads {

struct ObservableSample {
  double t = 0;
  double p1 = 0, p2 = 0, p3 = 0;
  double xbar = 0;           // um
  double v = 0;              // um/ms, <p>/m
  double photon_number = 0;
  double dark_pop = 0;
  double norm = 0;           // weight still on the grid
};

// Weight removed by absorbing layers, per component, on each side of the
// domain. Absorbed atoms are parked at the layer's inner edge at rest.
struct AbsorbedWeight {
  std::array<double, kComponents> low{}, high{};
  double park_low = 0, park_high = 0;

  double total() const;
  double component(std::size_t c) const { return low[c] + high[c]; }
  void scale(double factor);
};

struct Populations {
  double p1 = 0, p2 = 0, p3 = 0;
  double operator[](int level) const { return level == 1 ? p1 : level == 2 ? p2 : p3; }
};

// p_i = sum_j int |psi_{i,j}|^2 dx (unnormalised; equals the populations when norm = 1).
Populations populations(const SpinorField& f);

// Per-component integrals int |psi_c|^2 dx.
std::array<double, kComponents> component_weights(const SpinorField& f);

double photon_number(const SpinorField& f);

// Raw first moments: int x |psi|^2 dx and int k |phi|^2 dk (the latter via FFT).
struct Moments {
  double norm = 0;
  double x_moment = 0;
  double k_moment = 0;
};
Moments moments(const SpinorField& f);

struct PositionVelocity {
  double xbar = 0;
  double v = 0;
};

// xbar = <x>, v = <p>/m = (hbar/m) <k>, both normalised by the field norm.
PositionVelocity mean_position_and_velocity(const SpinorField& f, double hbar_over_m);

enum class StirapRegion { first_stirap, second_stirap };

// Weight of the local dark direction of one Raman zone. The mixing angle is
// evaluated from the log-ratio of the two Gaussians, so it stays well defined
// (and continuous) where both couplings underflow.
double dark_state_population(const SpinorField& f, StirapRegion region,
                             const DerivedParams& p, const ModelOptions& opts);

// First-zone dark direction for x < 0, second-zone one for x >= 0. The two
// coincide with |3,0> at x = 0 in the Jaynes-Cummings ordering.
double local_dark_state_population(const SpinorField& f, const DerivedParams& p,
                                   const ModelOptions& opts);

// Weight beyond the detector plane: x > x_det for positive travel, x < -x_det otherwise.
double transmission(const SpinorField& f, Direction travel, double x_det);

struct SideWeights {
  double transmitted = 0;  // beyond the detector on the far side
  double reflected = 0;    // beyond the mirrored plane on the source side
  double inside = 0;       // between the planes
};
SideWeights partition(const SpinorField& f, Direction travel, double x_det);

// Absorbed weight counts as beyond the detector on its own side.
SideWeights partition(const SpinorField& f, const AbsorbedWeight& absorbed, Direction travel,
                      double x_det);

inline constexpr double kDefaultDetector = 200.0;  // um

// Every per-sample observable of a trajectory whose field plus absorbed
// weight sums to one. Populations, position and photon number include the
// absorbed tallies; dark_pop is evaluated on the field only.
ObservableSample sample_observables(const SpinorField& f, const AbsorbedWeight& absorbed,
                                    double t, const DerivedParams& p, const ModelOptions& opts);

// Sum over j of |psi_{level,j}(x)|^2 for level 1..3.
std::vector<double> level_density(const SpinorField& f, int level);

}  // namespace ads
