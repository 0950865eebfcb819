#include "ads/observables.hpp"

#include <cmath>
#include <vector>

namespace ads {

namespace {

struct DarkAngle {
  double cos_theta;
  double sin_theta;
};

// Dark direction of a Lambda system with couplings a (to the "start" level)
// and b (to the "target" level), both Gaussians of common width w centred at
// ca and cb: d ~ a|start> - b|target> is normalised as (cos, sin) with
// tan(theta) = b/a computed from the exponent difference.
DarkAngle dark_angle(double x, double centre_start_coupling, double centre_target_coupling,
                     double w) {
  const double da = x - centre_start_coupling;
  const double db = x - centre_target_coupling;
  const double log_ratio = (da * da - db * db) / (2.0 * w * w);  // log(b/a)
  if (log_ratio > 700.0) return {0.0, 1.0};
  if (log_ratio < -700.0) return {1.0, 0.0};
  const double t = std::exp(log_ratio);
  const double inv = 1.0 / std::sqrt(1.0 + t * t);
  return {inv, t * inv};
}

}  // namespace

double AbsorbedWeight::total() const {
  double sum = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) sum += low[c] + high[c];
  return sum;
}

void AbsorbedWeight::scale(double factor) {
  for (std::size_t c = 0; c < kComponents; ++c) {
    low[c] *= factor;
    high[c] *= factor;
  }
}

std::array<double, kComponents> component_weights(const SpinorField& f) {
  std::array<double, kComponents> w{};
  for (std::size_t c = 0; c < kComponents; ++c) w[c] = component_norm2(f, c);
  return w;
}

Populations populations(const SpinorField& f) {
  const auto w = component_weights(f);
  return {w[0] + w[1], w[2] + w[3], w[4] + w[5]};
}

double photon_number(const SpinorField& f) {
  const auto w = component_weights(f);
  return w[1] + w[3] + w[5];
}

Moments moments(const SpinorField& f) {
  const Grid& g = f.grid();
  Moments m;
  double norm = 0.0, xm = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) {
    const auto comp = f.component(c);
    for (std::size_t j = 0; j < g.n_points; ++j) {
      const double d = std::norm(comp[j]);
      norm += d;
      xm += g.x[j] * d;
    }
  }
  m.norm = norm * g.dx;
  m.x_moment = xm * g.dx;

  // |phi(k)|^2 does not depend on the x_min phase, so the raw FFT suffices.
  SpinorField work = f;
  batch_fft_for(g.n_points)->forward(work.data());
  double km = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) {
    const auto comp = work.component(c);
    for (std::size_t j = 0; j < g.n_points; ++j) km += g.k[j] * std::norm(comp[j]);
  }
  // |phi|^2 dk = |FFT|^2 dx^2 / (2 pi) * dk = |FFT|^2 dx / N.
  m.k_moment = km * g.dx / static_cast<double>(g.n_points);
  return m;
}

PositionVelocity mean_position_and_velocity(const SpinorField& f, double hbar_over_m) {
  const Moments m = moments(f);
  if (m.norm <= 0.0) return {};
  return {m.x_moment / m.norm, hbar_over_m * m.k_moment / m.norm};
}

namespace {

// Pair of components spanning the dark direction for each region.
struct DarkPair {
  std::size_t start;   // level reached by the start coupling
  std::size_t target;  // level reached by the target coupling
  double centre_start, centre_target;
};

DarkPair dark_pair(StirapRegion region, const DerivedParams& p, const ModelOptions& opts) {
  if (region == StirapRegion::first_stirap) {
    // Omega_p couples 1-2, Omega_s couples 2-3: d ~ Omega_s |1,0> - Omega_p |3,0>.
    return {component_index(1, 0), component_index(3, 0), p.x_s, p.x_p};
  }
  // G_p couples 3-2, G_s couples 2-1 with a photon: d ~ G_s |3,n> - G_p |1,n'>.
  if (opts.cavity_ordering == CavityOrdering::jaynes_cummings)
    return {component_index(3, 0), component_index(1, 1), p.y_s, p.y_p};
  return {component_index(3, 1), component_index(1, 0), p.y_s, p.y_p};
}

double dark_overlap_at(const SpinorField& f, std::size_t j, const DarkPair& pair, double w) {
  const DarkAngle a = dark_angle(f.grid().x[j], pair.centre_start, pair.centre_target, w);
  const cplx amp = a.cos_theta * f.at(pair.start, j) - a.sin_theta * f.at(pair.target, j);
  return std::norm(amp);
}

}  // namespace

double dark_state_population(const SpinorField& f, StirapRegion region, const DerivedParams& p,
                             const ModelOptions& opts) {
  const DarkPair pair = dark_pair(region, p, opts);
  double sum = 0.0;
  for (std::size_t j = 0; j < f.n_points(); ++j) sum += dark_overlap_at(f, j, pair, p.waist_w);
  return sum * f.grid().dx;
}

double local_dark_state_population(const SpinorField& f, const DerivedParams& p,
                                   const ModelOptions& opts) {
  const DarkPair first = dark_pair(StirapRegion::first_stirap, p, opts);
  const DarkPair second = dark_pair(StirapRegion::second_stirap, p, opts);
  double sum = 0.0;
  for (std::size_t j = 0; j < f.n_points(); ++j)
    sum += dark_overlap_at(f, j, f.grid().x[j] < 0.0 ? first : second, p.waist_w);
  return sum * f.grid().dx;
}

SideWeights partition(const SpinorField& f, Direction travel, double x_det) {
  const Grid& g = f.grid();
  const double sign = travel == Direction::positive ? 1.0 : -1.0;
  SideWeights s;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    double d = 0.0;
    for (std::size_t c = 0; c < kComponents; ++c) d += std::norm(f.at(c, j));
    const double xs = sign * g.x[j];
    if (xs > x_det)
      s.transmitted += d;
    else if (xs < -x_det)
      s.reflected += d;
    else
      s.inside += d;
  }
  s.transmitted *= g.dx;
  s.reflected *= g.dx;
  s.inside *= g.dx;
  return s;
}

SideWeights partition(const SpinorField& f, const AbsorbedWeight& absorbed, Direction travel,
                      double x_det) {
  SideWeights s = partition(f, travel, x_det);
  double low = 0.0, high = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) {
    low += absorbed.low[c];
    high += absorbed.high[c];
  }
  if (travel == Direction::positive) {
    s.transmitted += high;
    s.reflected += low;
  } else {
    s.transmitted += low;
    s.reflected += high;
  }
  return s;
}

ObservableSample sample_observables(const SpinorField& f, const AbsorbedWeight& absorbed,
                                    double t, const DerivedParams& p, const ModelOptions& opts) {
  ObservableSample s;
  s.t = t;
  auto w = component_weights(f);
  double field_norm = 0.0;
  for (double v : w) field_norm += v;
  for (std::size_t c = 0; c < kComponents; ++c) w[c] += absorbed.component(c);
  s.p1 = w[0] + w[1];
  s.p2 = w[2] + w[3];
  s.p3 = w[4] + w[5];
  s.photon_number = w[1] + w[3] + w[5];
  s.norm = field_norm;
  const double total = field_norm + absorbed.total();

  const Moments m = moments(f);
  double low = 0.0, high = 0.0;
  for (std::size_t c = 0; c < kComponents; ++c) {
    low += absorbed.low[c];
    high += absorbed.high[c];
  }
  const double x_total = m.x_moment + low * absorbed.park_low + high * absorbed.park_high;
  if (total > 0.0) {
    s.xbar = x_total / total;
    s.v = p.hbar_over_m * m.k_moment / total;
  }
  s.dark_pop = local_dark_state_population(f, p, opts);
  return s;
}

double transmission(const SpinorField& f, Direction travel, double x_det) {
  return partition(f, travel, x_det).transmitted;
}

std::vector<double> level_density(const SpinorField& f, int level) {
  std::vector<double> out(f.n_points());
  const auto a = f.component(component_index(level, 0));
  const auto b = f.component(component_index(level, 1));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::norm(a[j]) + std::norm(b[j]);
  return out;
}

}  // namespace ads
