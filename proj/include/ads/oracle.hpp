#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ads/field.hpp"
#include "ads/hamiltonian.hpp"
#include "ads/params.hpp"

namespace ads {

class StepSizeUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive Dormand-Prince 5(4) controls. The error of a step is accepted when
// max |e_i| / (atol + rtol * max(|y_i|, |y_new_i|)) <= 1.
struct Dopri5Options {
  double rtol = 1e-9;
  double atol = 1e-11;
  double h_initial = 0;  // 0 picks a step from the generator scale
  double h_min = 1e-14;
  std::size_t max_steps = 50'000'000;
};

// Density matrix over the 6 n_points grid basis, ordered like SpinorField
// (component-major). Amplitudes carry sqrt(dx) so that trace(rho) = 1.
struct DenseState {
  Eigen::MatrixXcd rho;
  std::shared_ptr<const Grid> grid;
  double time = 0;
};

inline constexpr std::size_t kDensePointLimit = 64;

DenseState dense_from_field(const SpinorField& f);
Eigen::VectorXcd dense_vector(const SpinorField& f);
SpinorField field_from_dense_vector(std::shared_ptr<const Grid> grid, const Eigen::VectorXcd& v);

double trace_real(const DenseState& s);
double purity(const DenseState& s);
double hermiticity_error(const DenseState& s);
double min_eigenvalue(const DenseState& s);

struct DenseSample {
  double t = 0;
  double p1 = 0, p2 = 0, p3 = 0;
  double photon = 0;
  double trace = 0;
};

DenseSample dense_sample(const DenseState& s);

struct DenseRun {
  DenseState final_state;
  std::vector<DenseSample> samples;  // one per requested sample time
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

// Integrates the Lindblad equation with decay kappa on the single cavity
// mode, using the coupling matrices of the hamiltonian module, the spectral
// kinetic operator of the grid, and UN n(x) from the instantaneous diagonal.
DenseRun dense_lindblad_evolve(const DenseState& rho0, const DerivedParams& p,
                               const ModelOptions& opts, double t_final,
                               const std::vector<double>& sample_times = {},
                               const Dopri5Options& o = {});

struct PureRun {
  Eigen::VectorXcd psi;
  std::vector<DenseSample> samples;
};

// Same generator for a single state vector, without jumps (norm decays when
// kappa > 0).
PureRun dense_schrodinger_evolve(const SpinorField& psi0, const DerivedParams& p,
                                 const ModelOptions& opts, double t_final,
                                 const std::vector<double>& sample_times = {},
                                 const Dopri5Options& o = {});

struct StirapOptions {
  bool intuitive_order = false;  // swap the pump and Stokes centres
  bool pump_off = false;
  double x_start = 0, x_end = 0;  // um; both zero selects the first Raman zone +- 6 w
};

struct StirapResult {
  double p1 = 0, p2 = 0, p3 = 0;
  double max_p2 = 0;
  double duration = 0;  // ms
};

// Three-level (1, 2, 3) Schrodinger equation with the first-zone pulses seen
// by an atom at x = x_start + v0 t, starting in |1>.
StirapResult motionless_stirap(const DerivedParams& p, const StirapOptions& so = {},
                               const Dopri5Options& o = {});

// Shrunk forward diode for dense-versus-trajectory comparisons: desk-scale
// couplings, 3 um pulses at -14, -8, +8, +14 um, a 2 um packet from -24 um
// at 40 um/ms, on 64 co-moving points over [-32, 32) um.
PhysicalParams dense_toy_params();
std::shared_ptr<const Grid> dense_toy_grid(const DerivedParams& d);
inline constexpr double kDenseToyDuration = 1.2;  // ms

struct GaussianMoments {
  double center = 0;
  double width = 0;  // amplitude width: |psi|^2 ~ exp(-(x - c)^2 / width^2)
};

GaussianMoments free_gaussian_reference(double x0, double delta_l, double v0, double t,
                                        double hbar_over_m);

}  // namespace ads
