#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ads {

// CODATA 2018.
inline constexpr double kHbar = 1.054571817e-34;  // J s
// Rb-87 atomic mass, 86.909180520 u.
inline constexpr double kRb87Mass = 1.44316e-25;  // kg
inline constexpr double kPi = 3.14159265358979323846;

// Internal unit system: hbar = 1, lengths in micrometres, times in milliseconds.
inline constexpr double kUnitLength = 1e-6;  // m
inline constexpr double kUnitTime = 1e-3;    // s
inline constexpr double kUnitEnergy = kHbar / kUnitTime;  // J per (rad/ms)

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Level { one = 1, three = 3 };
enum class Direction { positive, negative };

// Physical (SI) description of the diode. x0 and v0 describe the forward
// configuration; a negative initial_direction mirrors both.
struct PhysicalParams {
  double omega0 = 0;       // rad/s, peak Rabi frequency
  double delta = 0;        // rad/s, single-photon detuning
  double kappa = 0;        // 1/s, cavity field decay
  double waist_w = 0;      // m
  double x_p = 0, x_s = 0; // m, classical pump / Stokes centres (first Raman zone)
  double y_p = 0, y_s = 0; // m, classical pump / cavity Stokes centres (second zone)
  double atom_mass_m = kRb87Mass;  // kg
  double a_s = 0;          // m
  double delta_t = 0;      // m, transverse width
  std::uint64_t n_atoms = 1;
  double x0 = 0;           // m
  double delta_l = 0;      // m, longitudinal packet width
  double v0 = 0;           // m/s
  Level initial_level = Level::one;
  Direction initial_direction = Direction::positive;
};

// Everything in internal units (um, ms, rad/ms, hbar = 1).
struct DerivedParams {
  double omega0, delta, kappa;
  double waist_w, x_p, x_s, y_p, y_s;
  double hbar_over_m;    // um^2/ms
  double a_s, delta_t;   // um
  std::uint64_t n_atoms;
  double interaction_u;  // (rad/ms) um, 2 hbar^2 a_s / (m delta_t^2)
  double un_product;     // interaction_u * n_atoms
  double delta_l;
  double x0, v0;         // forward configuration, um and um/ms
  double x0_initial, v0_initial;  // after the direction mirror
  double k0;             // v0_initial / (hbar/m), rad/um
  Level initial_level;
  Direction initial_direction;
  double unit_length = kUnitLength, unit_time = kUnitTime, unit_energy = kUnitEnergy;
};

// Throws ValidationError naming the offending field.
void validate(const PhysicalParams& p);

// True if the pulse layout is mirror symmetric (x_p = -y_s, x_s = -y_p) to 1e-9 relative.
bool has_mirror_geometry(const PhysicalParams& p);

DerivedParams nondimensionalize(const PhysicalParams& p);
PhysicalParams redimensionalize(const DerivedParams& d);

PhysicalParams paper_default_params();

// Paper defaults with omega0, delta, kappa scaled by 1/100, v0 by 1/10 and
// a_s by 1/100, geometry untouched. Keeps delta/omega0, kappa/omega0,
// E_kin/(omega0^2/delta) and U N n / E_kin at their paper values.
PhysicalParams desk_scale_params();

inline constexpr double kDeskFrequencyScale = 1e-2;
inline constexpr double kDeskVelocityScale = 1e-1;
inline constexpr double kDeskScatteringScale = 1e-2;

// U = 2 hbar^2 a_s / (m delta_t^2) in J m.
double interaction_strength_si(const PhysicalParams& p);

// Speed of the slow tail of the initial packet in um/ms: |v0| less three
// velocity standard deviations and the mean-field release speed
// sqrt(2 mu hbar/m), with mu = U N at the peak density 1/(sqrt(pi) dl).
double slow_tail_speed(const DerivedParams& d);

}  // namespace ads
