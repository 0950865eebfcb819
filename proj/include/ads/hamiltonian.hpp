#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "ads/field.hpp"
#include "ads/params.hpp"

namespace ads {

// Pulse stack at one position, energies in rad/ms (hbar = 1).
struct PulseValues {
  double w_stark = 0;  // Stark shift on |1>, peak 2 Omega0
  double omega_s = 0;  // classical Stokes, 2-3
  double omega_p = 0;  // classical pump, 1-2
  double g_s = 0;      // cavity Stokes, 1-2 with photon exchange
  double g_p = 0;      // classical pump of the second zone, 2-3
};

// Where the detuning sits. excited_state puts -Delta on the (2,j) diagonal,
// keeping the printed relative energy E2 - E3 = -Delta while restoring
// two-photon resonance between |1> and |3>. level3_literal is +Delta on (3,j).
enum class DetuningPlacement { excited_state, level3_literal };

// jaynes_cummings couples (2,0)<->(1,1) through G_s: a |2> atom decaying to |1>
// deposits a photon. literal_paper couples (2,1)<->(1,0).
enum class CavityOrdering { jaynes_cummings, literal_paper };

struct ModelOptions {
  DetuningPlacement detuning_placement = DetuningPlacement::excited_state;
  CavityOrdering cavity_ordering = CavityOrdering::jaynes_cummings;
  bool nonlinearity_on = true;
  bool kinetic_on = true;
};

using Matrix6c = Eigen::Matrix<cplx, 6, 6>;
using Vector6c = Eigen::Matrix<cplx, 6, 1>;

struct CouplingMatrix {
  Matrix6c hermitian_part;
  std::array<double, 6> decay_diagonal{};  // kappa/2 on photon-one components
  double x = 0;
};

PulseValues evaluate_pulses(double x, const DerivedParams& p);

CouplingMatrix assemble_coupling(double x, const DerivedParams& p, const ModelOptions& opts);

// exp(-i (H - i D) dt/2) at a single point. Eigendecomposition when D = 0,
// Pade scaling-and-squaring otherwise.
Matrix6c half_step_factor(const CouplingMatrix& m, double dt);

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-gridpoint half-step factors, immutable and shareable between workers.
// Entries are stored structure-of-arrays ([entry][point], real and imaginary
// parts apart) so the 6x6 product vectorises across grid points.
class HalfStepFactors {
 public:
  HalfStepFactors(std::size_t n_points, double dt)
      : n_(n_points), dt_(dt), re_(36 * n_points), im_(36 * n_points), diagonal_(n_points, 0) {}

  std::size_t n_points() const { return n_; }
  double dt() const { return dt_; }

  Matrix6c matrix(std::size_t j) const;
  void set(std::size_t j, const Matrix6c& m);
  bool is_diagonal(std::size_t j) const { return diagonal_[j] != 0; }

  // psi <- F(x) psi at every grid point.
  void apply(SpinorField& f) const;

 private:
  std::size_t n_;
  double dt_;
  std::vector<double> re_, im_;
  std::vector<std::uint8_t> diagonal_;
};

HalfStepFactors precompute_half_step(const Grid& g, const DerivedParams& p,
                                     const ModelOptions& opts, double dt);

}  // namespace ads
