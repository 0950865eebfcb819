#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ads/params.hpp"

namespace ads {

using cplx = std::complex<double>;

// SIMD-aligned storage (backed by fftw_malloc) so FFTW new-array execution is legal.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using AlignedBuffer = std::vector<cplx, FftwAllocator<cplx>>;

class NyquistViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform periodic grid on [x_min, x_max) with FFT-ordered wavenumbers.
//
// A non-zero k_offset selects the co-moving representation: the stored field
// is the envelope phi with psi(x) = exp(i k_offset x) phi(x), and k[j] holds
// the physical wavenumber k_offset + (signed index) dk. Densities and every
// position-diagonal operator are unchanged; only the band of representable
// momenta moves to [k_offset - pi/dx, k_offset + pi/dx).
struct Grid {
  double x_min = 0, x_max = 0;
  std::size_t n_points = 0;
  double dx = 0;
  double dk = 0;
  double k_offset = 0;
  std::vector<double> x;
  std::vector<double> k;

  static std::shared_ptr<const Grid> make(double x_min, double x_max, std::size_t n_points,
                                          double k_offset = 0.0);
  double k_max() const { return kPi / dx; }
  double length() const { return x_max - x_min; }
};

// Smallest power-of-two grid size on [x_min, x_max) that satisfies the
// initial-state Nyquist margin for wavenumber k0 and packet width delta_l.
std::size_t required_points(double x_min, double x_max, double k0, double delta_l,
                            double k_offset = 0.0);

// Six components in the basis order (1,0),(1,1),(2,0),(2,1),(3,0),(3,1).
inline constexpr std::size_t kComponents = 6;

constexpr std::size_t component_index(int level, int photons) {
  return static_cast<std::size_t>(2 * (level - 1) + photons);
}
constexpr int component_level(std::size_t c) { return static_cast<int>(c / 2) + 1; }
constexpr int component_photons(std::size_t c) { return static_cast<int>(c % 2); }

enum class Representation { position, momentum };

// Batched 6-component DFT. Plans are built with FFTW_ESTIMATE so the plan,
// and therefore every rounding, is reproducible from run to run.
class BatchFft {
 public:
  explicit BatchFft(std::size_t n_points, std::size_t howmany = kComponents);
  ~BatchFft();
  BatchFft(const BatchFft&) = delete;
  BatchFft& operator=(const BatchFft&) = delete;

  // Unnormalised transforms in place; data must hold howmany * n contiguous blocks.
  void forward(cplx* data) const;
  void backward(cplx* data) const;
  std::size_t n_points() const { return n_; }

 private:
  std::size_t n_, howmany_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

// Shared transform for a grid size; cached process-wide.
std::shared_ptr<const BatchFft> batch_fft_for(std::size_t n_points);

class SpinorField {
 public:
  explicit SpinorField(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t n_points() const { return grid_->n_points; }
  Representation representation() const { return rep_; }

  std::span<cplx> component(std::size_t c) {
    return {data_.data() + c * n_points(), n_points()};
  }
  std::span<const cplx> component(std::size_t c) const {
    return {data_.data() + c * n_points(), n_points()};
  }
  cplx& at(std::size_t c, std::size_t j) { return data_[c * n_points() + j]; }
  cplx at(std::size_t c, std::size_t j) const { return data_[c * n_points() + j]; }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  std::span<cplx> raw() { return {data_.data(), data_.size()}; }
  std::span<const cplx> raw() const { return {data_.data(), data_.size()}; }

  void scale(double factor);
  void set_zero();
  void set_representation(Representation r) { rep_ = r; }

 private:
  std::shared_ptr<const Grid> grid_;
  AlignedBuffer data_;
  Representation rep_ = Representation::position;
};

// Riemann sum of |psi|^2 over all components (dx in position, dk in momentum).
double norm2(const SpinorField& f);
double component_norm2(const SpinorField& f, std::size_t c);

// Continuous-FT approximation phi(k) = dx / sqrt(2 pi) sum_n psi(x_n) e^{-i k x_n},
// stored in FFT order. Unitary with respect to the dx / dk measures.
SpinorField to_momentum(const SpinorField& f);
SpinorField to_position(const SpinorField& f);

// Gaussian (pi dl^2)^(-1/4) exp(i k0 x) exp(-(x-x0)^2 / (2 dl^2))
// in component (initial_level, 0), renormalised on the grid. The Nyquist
// margin applies to |k0 - k_offset|.
SpinorField build_initial_state(std::shared_ptr<const Grid> grid, const DerivedParams& p);

// Flat binary snapshot: "ADS1", u32 n_points, u32 6, f64 dx, f64 x_min, f64 t_ms,
// then 6 x n_points f64 densities, little-endian.
void write_density_binary(const std::string& path, const Grid& grid, double t_ms,
                          std::span<const double> densities);
void write_density_csv(const std::string& path, const Grid& grid, double t_ms,
                       std::span<const double> densities);

struct DensitySnapshot {
  std::size_t n_points = 0;
  double dx = 0, x_min = 0, t_ms = 0;
  std::vector<double> densities;  // [6][n_points]
};
DensitySnapshot read_density_binary(const std::string& path);

// |psi_c(j)|^2 for every component, row-major [6][n_points].
std::vector<double> component_densities(const SpinorField& f);

}  // namespace ads
