#include "ads/hamiltonian.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace ads {

namespace {

constexpr std::size_t k10 = component_index(1, 0);
constexpr std::size_t k11 = component_index(1, 1);
constexpr std::size_t k20 = component_index(2, 0);
constexpr std::size_t k21 = component_index(2, 1);
constexpr std::size_t k30 = component_index(3, 0);
constexpr std::size_t k31 = component_index(3, 1);

// Values below 1e-300 of the peak are flushed so tails never go subnormal.
double gaussian(double peak, double x, double centre, double w) {
  const double d = x - centre;
  const double v = peak * std::exp(-d * d / (2.0 * w * w));
  return v < 1e-300 * peak ? 0.0 : v;
}

void set_pair(Matrix6c& h, std::size_t a, std::size_t b, double value) {
  h(a, b) = value;
  h(b, a) = value;
}

}  // namespace

PulseValues evaluate_pulses(double x, const DerivedParams& p) {
  PulseValues v;
  v.w_stark = gaussian(2.0 * p.omega0, x, 0.0, p.waist_w);
  v.omega_s = gaussian(p.omega0, x, p.x_s, p.waist_w);
  v.omega_p = gaussian(p.omega0, x, p.x_p, p.waist_w);
  v.g_s = gaussian(p.omega0, x, p.y_s, p.waist_w);
  v.g_p = gaussian(p.omega0, x, p.y_p, p.waist_w);
  return v;
}

CouplingMatrix assemble_coupling(double x, const DerivedParams& p, const ModelOptions& opts) {
  const PulseValues v = evaluate_pulses(x, p);
  CouplingMatrix m;
  m.x = x;
  Matrix6c& h = m.hermitian_part;
  h.setZero();

  h(k10, k10) = v.w_stark;
  h(k11, k11) = v.w_stark;
  if (opts.detuning_placement == DetuningPlacement::excited_state) {
    h(k20, k20) = -p.delta;
    h(k21, k21) = -p.delta;
  } else {
    h(k30, k30) = p.delta;
    h(k31, k31) = p.delta;
  }

  const double two_three = v.omega_s + v.g_p;
  set_pair(h, k20, k30, two_three);
  set_pair(h, k21, k31, two_three);
  set_pair(h, k20, k10, v.omega_p);
  set_pair(h, k21, k11, v.omega_p);
  if (opts.cavity_ordering == CavityOrdering::jaynes_cummings)
    set_pair(h, k20, k11, v.g_s);
  else
    set_pair(h, k21, k10, v.g_s);

  const double half_kappa = 0.5 * p.kappa;
  m.decay_diagonal = {0.0, half_kappa, 0.0, half_kappa, 0.0, half_kappa};
  return m;
}

Matrix6c half_step_factor(const CouplingMatrix& m, double dt) {
  const double tau = 0.5 * dt;
  bool lossless = true;
  for (double d : m.decay_diagonal) lossless = lossless && d == 0.0;

  if (lossless) {
    Eigen::SelfAdjointEigenSolver<Matrix6c> eig(m.hermitian_part);
    if (eig.info() != Eigen::Success)
      throw NonConvergence("eigendecomposition of the coupling matrix failed at x = " +
                           std::to_string(m.x));
    Vector6c phases;
    for (int i = 0; i < 6; ++i) phases(i) = std::polar(1.0, -eig.eigenvalues()(i) * tau);
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  }

  Matrix6c generator = m.hermitian_part * cplx(0.0, -tau);
  for (int i = 0; i < 6; ++i) generator(i, i) -= m.decay_diagonal[i] * tau;
  Matrix6c out = generator.exp();
  if (!out.allFinite())
    throw NonConvergence("matrix exponential did not converge at x = " + std::to_string(m.x));
  return out;
}

Matrix6c HalfStepFactors::matrix(std::size_t j) const {
  Matrix6c m;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const std::size_t e = static_cast<std::size_t>(6 * r + c) * n_ + j;
      m(r, c) = cplx(re_[e], im_[e]);
    }
  return m;
}

void HalfStepFactors::set(std::size_t j, const Matrix6c& m) {
  bool diag = true;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const std::size_t e = static_cast<std::size_t>(6 * r + c) * n_ + j;
      re_[e] = m(r, c).real();
      im_[e] = m(r, c).imag();
      if (r != c && m(r, c) != cplx(0.0, 0.0)) diag = false;
    }
  diagonal_[j] = diag ? 1 : 0;
}

void HalfStepFactors::apply(SpinorField& f) const {
  constexpr std::size_t kBlock = 64;
  const std::size_t n = n_;
  double* base = reinterpret_cast<double*>(f.data());
  alignas(64) double xr[6][kBlock], xi[6][kBlock], yr[6][kBlock], yi[6][kBlock];

  for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
    const std::size_t len = std::min(kBlock, n - j0);
    for (std::size_t c = 0; c < 6; ++c) {
      const double* src = base + 2 * (c * n + j0);
      for (std::size_t t = 0; t < len; ++t) {
        xr[c][t] = src[2 * t];
        xi[c][t] = src[2 * t + 1];
      }
    }
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t t = 0; t < len; ++t) {
        yr[r][t] = 0.0;
        yi[r][t] = 0.0;
      }
      for (std::size_t c = 0; c < 6; ++c) {
        const double* ar = re_.data() + (6 * r + c) * n + j0;
        const double* ai = im_.data() + (6 * r + c) * n + j0;
        for (std::size_t t = 0; t < len; ++t) {
          yr[r][t] += ar[t] * xr[c][t] - ai[t] * xi[c][t];
          yi[r][t] += ar[t] * xi[c][t] + ai[t] * xr[c][t];
        }
      }
    }
    for (std::size_t r = 0; r < 6; ++r) {
      double* dst = base + 2 * (r * n + j0);
      for (std::size_t t = 0; t < len; ++t) {
        dst[2 * t] = yr[r][t];
        dst[2 * t + 1] = yi[r][t];
      }
    }
  }
}

HalfStepFactors precompute_half_step(const Grid& g, const DerivedParams& p,
                                     const ModelOptions& opts, double dt) {
  if (dt == 0.0 || !std::isfinite(dt)) throw ValidationError("time.dt", "must be non-zero");
  if (dt < 0.0 && p.kappa != 0.0)
    throw ValidationError("time.dt", "negative steps are only defined for kappa = 0");
  HalfStepFactors out(g.n_points, dt);
  for (std::size_t j = 0; j < g.n_points; ++j)
    out.set(j, half_step_factor(assemble_coupling(g.x[j], p, opts), dt));
  return out;
}

}  // namespace ads
