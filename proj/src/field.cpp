#include "ads/field.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

namespace ads {

static_assert(std::endian::native == std::endian::little,
              "snapshot writers assume a little-endian host");

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  void* p = fftw_malloc(n * sizeof(T));
  if (!p && n != 0) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_free(p);
}

template struct FftwAllocator<cplx>;
template struct FftwAllocator<double>;

std::shared_ptr<const Grid> Grid::make(double x_min, double x_max, std::size_t n_points,
                                       double k_offset) {
  if (!is_power_of_two(n_points) || n_points < 2)
    throw ValidationError("grid.n_points", "must be a power of two >= 2");
  if (!(x_max > x_min)) throw ValidationError("grid.x_max", "must exceed x_min");
  if (!std::isfinite(k_offset)) throw ValidationError("grid.k_offset", "must be finite");
  auto g = std::make_shared<Grid>();
  g->x_min = x_min;
  g->x_max = x_max;
  g->n_points = n_points;
  g->k_offset = k_offset;
  g->dx = (x_max - x_min) / static_cast<double>(n_points);
  g->dk = 2.0 * kPi / (static_cast<double>(n_points) * g->dx);
  g->x.resize(n_points);
  g->k.resize(n_points);
  const auto n = static_cast<std::ptrdiff_t>(n_points);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    g->x[j] = x_min + static_cast<double>(j) * g->dx;
    const std::ptrdiff_t signed_j = j < n / 2 ? j : j - n;
    g->k[j] = k_offset + static_cast<double>(signed_j) * g->dk;
  }
  return g;
}

std::size_t required_points(double x_min, double x_max, double k0, double delta_l,
                            double k_offset) {
  const double needed_kmax = (std::abs(k0 - k_offset) + 4.0 / delta_l) / 0.9;
  std::size_t n = 2;
  while (kPi / ((x_max - x_min) / static_cast<double>(n)) <= needed_kmax) n *= 2;
  return n;
}

BatchFft::BatchFft(std::size_t n_points, std::size_t howmany)
    : n_(n_points), howmany_(howmany) {
  std::lock_guard lock(planner_mutex());
  auto* scratch = fftw_alloc_complex(n_ * howmany_);
  const int n = static_cast<int>(n_);
  const int dist = static_cast<int>(n_);
  fwd_ = fftw_plan_many_dft(1, &n, static_cast<int>(howmany_), scratch, nullptr, 1, dist,
                            scratch, nullptr, 1, dist, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_many_dft(1, &n, static_cast<int>(howmany_), scratch, nullptr, 1, dist,
                            scratch, nullptr, 1, dist, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(scratch);
  if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
}

BatchFft::~BatchFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void BatchFft::forward(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), d, d);
}

void BatchFft::backward(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), d, d);
}

std::shared_ptr<const BatchFft> batch_fft_for(std::size_t n_points) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const BatchFft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n_points];
  if (!slot) slot = std::make_shared<BatchFft>(n_points);
  return slot;
}

SpinorField::SpinorField(std::shared_ptr<const Grid> grid)
    : grid_(std::move(grid)), data_(kComponents * grid_->n_points, cplx{0.0, 0.0}) {}

void SpinorField::scale(double factor) {
  for (auto& z : data_) z *= factor;
}

void SpinorField::set_zero() {
  for (auto& z : data_) z = 0.0;
}

double component_norm2(const SpinorField& f, std::size_t c) {
  double sum = 0.0;
  for (const auto& z : f.component(c)) sum += std::norm(z);
  const double measure = f.representation() == Representation::position ? f.grid().dx
                                                                        : f.grid().dk;
  return sum * measure;
}

double norm2(const SpinorField& f) {
  double total = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) total += component_norm2(f, c);
  return total;
}

SpinorField to_momentum(const SpinorField& f) {
  if (f.representation() != Representation::position)
    throw std::logic_error("to_momentum: field is already in momentum representation");
  const Grid& g = f.grid();
  SpinorField out = f;
  batch_fft_for(g.n_points)->forward(out.data());
  const double pref = g.dx / std::sqrt(2.0 * kPi);
  for (std::size_t c = 0; c < kComponents; ++c) {
    auto comp = out.component(c);
    for (std::size_t j = 0; j < g.n_points; ++j)
      comp[j] *= pref * std::polar(1.0, -(g.k[j] - g.k_offset) * g.x_min);
  }
  out.set_representation(Representation::momentum);
  return out;
}

SpinorField to_position(const SpinorField& f) {
  if (f.representation() != Representation::momentum)
    throw std::logic_error("to_position: field is already in position representation");
  const Grid& g = f.grid();
  SpinorField out = f;
  const double pref = g.dk / std::sqrt(2.0 * kPi);
  for (std::size_t c = 0; c < kComponents; ++c) {
    auto comp = out.component(c);
    for (std::size_t j = 0; j < g.n_points; ++j)
      comp[j] *= pref * std::polar(1.0, (g.k[j] - g.k_offset) * g.x_min);
  }
  batch_fft_for(g.n_points)->backward(out.data());
  out.set_representation(Representation::position);
  return out;
}

SpinorField build_initial_state(std::shared_ptr<const Grid> grid, const DerivedParams& p) {
  const Grid& g = *grid;
  const double x0 = p.x0_initial;
  const double dl = p.delta_l;
  if (x0 - 4.0 * dl < g.x_min || x0 + 4.0 * dl > g.x_max) {
    std::ostringstream msg;
    msg << "initial packet [" << x0 - 4.0 * dl << ", " << x0 + 4.0 * dl
        << "] um does not fit in the domain [" << g.x_min << ", " << g.x_max << ") um";
    throw DomainTooSmall(msg.str());
  }
  const double k_needed = std::abs(p.k0 - g.k_offset) + 4.0 / dl;
  if (!(k_needed < 0.9 * g.k_max())) {
    std::ostringstream msg;
    msg << "initial packet needs |k| up to " << k_needed << " rad/um but 0.9*pi/dx = "
        << 0.9 * g.k_max() << "; raise n_points to at least "
        << required_points(g.x_min, g.x_max, p.k0, dl, g.k_offset);
    throw NyquistViolation(msg.str());
  }

  SpinorField f(std::move(grid));
  const std::size_t c = component_index(static_cast<int>(p.initial_level), 0);
  const double amp = std::pow(kPi * dl * dl, -0.25);
  auto comp = f.component(c);
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double x = g.x[j];
    const double envelope = amp * std::exp(-(x - x0) * (x - x0) / (2.0 * dl * dl));
    comp[j] = envelope * std::polar(1.0, (p.k0 - g.k_offset) * x);
  }
  f.scale(1.0 / std::sqrt(norm2(f)));
  return f;
}

std::vector<double> component_densities(const SpinorField& f) {
  std::vector<double> out(kComponents * f.n_points());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(f.data()[i]);
  return out;
}

namespace {

template <class T>
void put(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  os.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char bytes[sizeof(T)];
  is.read(bytes, sizeof(T));
  if (!is) throw std::runtime_error("truncated density snapshot");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_density_binary(const std::string& path, const Grid& grid, double t_ms,
                          std::span<const double> densities) {
  if (densities.size() != kComponents * grid.n_points)
    throw std::invalid_argument("density array does not match grid");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("ADS1", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.n_points));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kComponents));
  put<double>(os, grid.dx);
  put<double>(os, grid.x_min);
  put<double>(os, t_ms);
  for (double d : densities) put<double>(os, d);
}

void write_density_csv(const std::string& path, const Grid& grid, double t_ms,
                       std::span<const double> densities) {
  if (densities.size() != kComponents * grid.n_points)
    throw std::invalid_argument("density array does not match grid");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  os << "# t_ms=" << t_ms << "\n";
  os << "x_um,rho_10,rho_11,rho_20,rho_21,rho_30,rho_31\n";
  const std::size_t n = grid.n_points;
  for (std::size_t j = 0; j < n; ++j) {
    os << grid.x[j];
    for (std::size_t c = 0; c < kComponents; ++c) os << ',' << densities[c * n + j];
    os << '\n';
  }
}

DensitySnapshot read_density_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ADS1", 4) != 0)
    throw std::runtime_error(path + ": not an ADS1 density snapshot");
  DensitySnapshot s;
  s.n_points = get<std::uint32_t>(is);
  const auto comps = get<std::uint32_t>(is);
  if (comps != kComponents) throw std::runtime_error(path + ": expected 6 components");
  s.dx = get<double>(is);
  s.x_min = get<double>(is);
  s.t_ms = get<double>(is);
  s.densities.resize(kComponents * s.n_points);
  for (auto& d : s.densities) d = get<double>(is);
  return s;
}

}  // namespace ads
