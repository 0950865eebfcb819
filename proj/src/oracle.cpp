#include "ads/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ads {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct ErrorNorm {
  double value = 0;
  Eigen::Index culprit = 0;
};

template <class State>
ErrorNorm error_norm(const State& err, const State& y, const State& y_new, const Dopri5Options& o) {
  const auto scale = (o.atol + o.rtol * y.array().abs().max(y_new.array().abs())).eval();
  const auto ratio = (err.array().abs() / scale).eval();
  ErrorNorm e;
  Eigen::Index r = 0, c = 0;
  e.value = ratio.maxCoeff(&r, &c);
  e.culprit = r + c * err.rows();
  return e;
}

// Integrates y' = f(t, y) from t0 to t1, stopping exactly at every time in
// `stops` (inside (t0, t1]) to call on_stop, and calling on_step after every
// accepted step. Returns the last step size tried.
template <class State, class F, class OnStop, class OnStep>
double dopri5(State& y, double t0, double t1, const F& f, const Dopri5Options& o,
              std::vector<double> stops, OnStop on_stop, OnStep on_step, double h,
              std::size_t& accepted, std::size_t& rejected,
              const std::function<std::string(Eigen::Index)>& describe) {
  stops.erase(std::remove_if(stops.begin(), stops.end(),
                             [&](double s) { return !(s > t0 && s < t1); }),
              stops.end());
  stops.push_back(t1);
  std::sort(stops.begin(), stops.end());
  double t = t0;
  State k1 = f(t, y);
  for (double target : stops) {
    while (t < target) {
      if (accepted + rejected > o.max_steps) throw StepSizeUnderflow("step budget exhausted");
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      const State k2 = f(t + c2 * step, (y + step * (a21 * k1)).eval());
      const State k3 = f(t + c3 * step, (y + step * (a31 * k1 + a32 * k2)).eval());
      const State k4 = f(t + c4 * step, (y + step * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
      const State k5 =
          f(t + c5 * step, (y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
      const State k6 = f(t + step, (y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                                a65 * k5))
                                       .eval());
      State y_new = (y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6)).eval();
      const State k7 = f(t + step, y_new);
      const State err =
          (step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).eval();
      const ErrorNorm en = error_norm(err, y, y_new, o);
      const double factor =
          std::clamp(en.value > 0.0 ? 0.9 * std::pow(en.value, -0.2) : 5.0, 0.2, 5.0);
      if (en.value <= 1.0) {
        t = last ? target : t + step;
        y = std::move(y_new);
        k1 = k7;
        ++accepted;
        on_step(t, y);
        if (!last) h = step * factor;
      } else {
        ++rejected;
        h = step * factor;
        if (h < o.h_min) {
          std::ostringstream msg;
          msg << "step size " << h << " ms below h_min at t = " << t
              << " ms; largest error in " << describe(en.culprit);
          throw StepSizeUnderflow(msg.str());
        }
      }
    }
    on_stop(t, y);
  }
  return h;
}

// Kinetic operator T = F^-1 diag(hbar k^2 / 2m) F on the grid, acting on the
// stored (possibly co-moving) amplitudes.
Eigen::MatrixXcd kinetic_matrix(const Grid& g, double hbar_over_m) {
  const std::size_t n = g.n_points;
  Eigen::MatrixXcd t(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      cplx sum = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        const double kq = g.k[q];
        const double rel = kq - g.k_offset;
        sum += 0.5 * hbar_over_m * kq * kq *
               std::polar(1.0, rel * (g.x[a] - g.x[b]));
      }
      t(a, b) = sum / static_cast<double>(n);
    }
  return t;
}

struct DenseGenerator {
  std::size_t n = 0;
  double dx = 0;
  double kappa = 0;
  double un = 0;
  bool kinetic_on = true;
  Eigen::MatrixXcd kinetic;
  std::vector<Matrix6c> local;  // H - i decay at each grid point

  DenseGenerator(const Grid& g, const DerivedParams& p, const ModelOptions& opts)
      : n(g.n_points), dx(g.dx), kappa(p.kappa), un(opts.nonlinearity_on ? p.un_product : 0.0),
        kinetic_on(opts.kinetic_on) {
    if (n > kDensePointLimit)
      throw ValidationError("grid.n_points", "dense oracle is limited to 64 points");
    if (kinetic_on) kinetic = kinetic_matrix(g, p.hbar_over_m);
    local.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const CouplingMatrix m = assemble_coupling(g.x[j], p, opts);
      local[j] = m.hermitian_part;
      for (int c = 0; c < 6; ++c) local[j](c, c) -= cplx(0.0, m.decay_diagonal[c]);
    }
  }

  std::size_t dim() const { return kComponents * n; }

  // Generator scale used for the first step guess.
  double scale() const {
    double s = 0.0;
    for (const auto& m : local) s = std::max(s, m.cwiseAbs().rowwise().sum().maxCoeff());
    if (kinetic_on) s += kinetic.cwiseAbs().rowwise().sum().maxCoeff();
    return s + un / dx;
  }

  // out = H_eff x for a block of columns (rows ordered component-major).
  template <class In>
  RowMatrix apply(const In& x, const std::vector<double>& density) const {
    RowMatrix out(x.rows(), x.cols());
    if (kinetic_on) {
      for (std::size_t c = 0; c < kComponents; ++c)
        out.middleRows(c * n, n).noalias() = kinetic * x.middleRows(c * n, n);
    } else {
      out.setZero();
    }
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix6c& m = local[j];
      for (std::size_t a = 0; a < kComponents; ++a) {
        auto row = out.row(a * n + j);
        for (std::size_t b = 0; b < kComponents; ++b)
          if (m(a, b) != cplx(0.0, 0.0)) row += m(a, b) * x.row(b * n + j);
        if (un != 0.0) row += (un * density[j]) * x.row(a * n + j);
      }
    }
    return out;
  }
};

std::vector<double> density_from_rho(const RowMatrix& rho, std::size_t n, double dx) {
  std::vector<double> d(n, 0.0);
  for (std::size_t c = 0; c < kComponents; ++c)
    for (std::size_t j = 0; j < n; ++j) d[j] += rho(c * n + j, c * n + j).real() / dx;
  return d;
}

std::vector<double> density_from_psi(const Eigen::VectorXcd& psi, std::size_t n, double dx) {
  std::vector<double> d(n, 0.0);
  for (std::size_t c = 0; c < kComponents; ++c)
    for (std::size_t j = 0; j < n; ++j) d[j] += std::norm(psi(c * n + j)) / dx;
  return d;
}

std::string describe_index(Eigen::Index flat, std::size_t n, std::size_t rows) {
  const auto r = static_cast<std::size_t>(flat) % rows;
  std::ostringstream s;
  s << "component " << r / n << " at grid point " << r % n;
  return s.str();
}

DenseSample sample_from_diagonal(double t, const std::vector<double>& diag, std::size_t n) {
  DenseSample s;
  s.t = t;
  for (std::size_t c = 0; c < kComponents; ++c) {
    double w = 0.0;
    for (std::size_t j = 0; j < n; ++j) w += diag[c * n + j];
    const int level = component_level(c);
    (level == 1 ? s.p1 : level == 2 ? s.p2 : s.p3) += w;
    if (component_photons(c) == 1) s.photon += w;
    s.trace += w;
  }
  return s;
}

}  // namespace

Eigen::VectorXcd dense_vector(const SpinorField& f) {
  const std::size_t n = f.n_points();
  Eigen::VectorXcd v(kComponents * n);
  const double root = std::sqrt(f.grid().dx);
  for (std::size_t i = 0; i < kComponents * n; ++i) v(i) = f.data()[i] * root;
  return v;
}

SpinorField field_from_dense_vector(std::shared_ptr<const Grid> grid, const Eigen::VectorXcd& v) {
  SpinorField f(std::move(grid));
  const double inv_root = 1.0 / std::sqrt(f.grid().dx);
  for (std::size_t i = 0; i < kComponents * f.n_points(); ++i) f.data()[i] = v(i) * inv_root;
  return f;
}

DenseState dense_from_field(const SpinorField& f) {
  if (f.n_points() > kDensePointLimit)
    throw ValidationError("grid.n_points", "dense oracle is limited to 64 points");
  const Eigen::VectorXcd v = dense_vector(f);
  return {v * v.adjoint(), f.grid_ptr(), 0.0};
}

double trace_real(const DenseState& s) { return s.rho.trace().real(); }

double purity(const DenseState& s) { return (s.rho * s.rho).trace().real(); }

double hermiticity_error(const DenseState& s) {
  return (s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DenseState& s) {
  const Eigen::MatrixXcd h = 0.5 * (s.rho + s.rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

DenseSample dense_sample(const DenseState& s) {
  const std::size_t n = s.grid->n_points;
  std::vector<double> diag(kComponents * n);
  for (std::size_t i = 0; i < diag.size(); ++i)
    diag[i] = s.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  return sample_from_diagonal(s.time, diag, n);
}

DenseRun dense_lindblad_evolve(const DenseState& rho0, const DerivedParams& p,
                               const ModelOptions& opts, double t_final,
                               const std::vector<double>& sample_times, const Dopri5Options& o) {
  const Grid& g = *rho0.grid;
  const DenseGenerator gen(g, p, opts);
  const std::size_t n = gen.n;
  const auto D = static_cast<Eigen::Index>(gen.dim());
  if (rho0.rho.rows() != D || rho0.rho.cols() != D)
    throw std::invalid_argument("density matrix does not match the grid");

  auto rhs = [&](double, const RowMatrix& rho) -> RowMatrix {
    const RowMatrix a = gen.apply(rho, density_from_rho(rho, n, gen.dx));
    RowMatrix out = cplx(0.0, -1.0) * (a - a.adjoint());
    if (gen.kappa != 0.0) {
      for (int lvl = 0; lvl < 3; ++lvl)
        for (int lvl2 = 0; lvl2 < 3; ++lvl2) {
          const auto r0 = static_cast<Eigen::Index>(2 * lvl * n);
          const auto c0 = static_cast<Eigen::Index>(2 * lvl2 * n);
          const auto nn = static_cast<Eigen::Index>(n);
          out.block(r0, c0, nn, nn) += gen.kappa * rho.block(r0 + nn, c0 + nn, nn, nn);
        }
    }
    return out;
  };

  DenseRun run;
  RowMatrix rho = rho0.rho;
  auto diag_of = [&](const RowMatrix& r) {
    std::vector<double> d(static_cast<std::size_t>(D));
    for (Eigen::Index i = 0; i < D; ++i) d[static_cast<std::size_t>(i)] = r(i, i).real();
    return d;
  };
  std::vector<double> stops = sample_times;
  const bool sample_start =
      std::find(sample_times.begin(), sample_times.end(), rho0.time) != sample_times.end();
  if (sample_start) run.samples.push_back(sample_from_diagonal(rho0.time, diag_of(rho), n));
  const double h0 = o.h_initial > 0.0 ? o.h_initial : 0.1 / std::max(1.0, gen.scale());
  dopri5(
      rho, rho0.time, rho0.time + t_final, rhs, o, stops,
      [&](double t, const RowMatrix& r) {
        if (std::find(sample_times.begin(), sample_times.end(), t) != sample_times.end())
          run.samples.push_back(sample_from_diagonal(t, diag_of(r), n));
      },
      [](double, const RowMatrix&) {}, h0, run.accepted_steps, run.rejected_steps,
      [&](Eigen::Index i) { return describe_index(i, n, static_cast<std::size_t>(D)); });
  run.final_state = {Eigen::MatrixXcd(rho), rho0.grid, rho0.time + t_final};
  return run;
}

PureRun dense_schrodinger_evolve(const SpinorField& psi0, const DerivedParams& p,
                                 const ModelOptions& opts, double t_final,
                                 const std::vector<double>& sample_times, const Dopri5Options& o) {
  const DenseGenerator gen(psi0.grid(), p, opts);
  const std::size_t n = gen.n;
  using Vec = Eigen::VectorXcd;
  auto rhs = [&](double, const Vec& psi) -> Vec {
    Eigen::Map<const RowMatrix> col(psi.data(), psi.size(), 1);
    const RowMatrix hx = gen.apply(col, density_from_psi(psi, n, gen.dx));
    return cplx(0.0, -1.0) * Eigen::Map<const Vec>(hx.data(), hx.size());
  };
  auto sample = [&](double t, const Vec& psi) {
    std::vector<double> d(static_cast<std::size_t>(psi.size()));
    for (Eigen::Index i = 0; i < psi.size(); ++i) d[static_cast<std::size_t>(i)] = std::norm(psi(i));
    return sample_from_diagonal(t, d, n);
  };
  PureRun run;
  Vec psi = dense_vector(psi0);
  if (std::find(sample_times.begin(), sample_times.end(), 0.0) != sample_times.end())
    run.samples.push_back(sample(0.0, psi));
  std::size_t acc = 0, rej = 0;
  const double h0 = o.h_initial > 0.0 ? o.h_initial : 0.1 / std::max(1.0, gen.scale());
  dopri5(
      psi, 0.0, t_final, rhs, o, sample_times,
      [&](double t, const Vec& y) {
        if (std::find(sample_times.begin(), sample_times.end(), t) != sample_times.end())
          run.samples.push_back(sample(t, y));
      },
      [](double, const Vec&) {}, h0, acc, rej,
      [&](Eigen::Index i) { return describe_index(i, n, static_cast<std::size_t>(psi.size())); });
  run.psi = psi;
  return run;
}

StirapResult motionless_stirap(const DerivedParams& p, const StirapOptions& so,
                               const Dopri5Options& o) {
  DerivedParams q = p;
  if (so.intuitive_order) std::swap(q.x_p, q.x_s);
  const double v = std::abs(p.v0);
  if (!(v > 0.0)) throw ValidationError("v0", "must be non-zero for a swept STIRAP");
  double x_start = so.x_start, x_end = so.x_end;
  if (x_start == 0.0 && x_end == 0.0) {
    x_start = std::min(q.x_p, q.x_s) - 6.0 * q.waist_w;
    x_end = std::max(q.x_p, q.x_s) + 6.0 * q.waist_w;
  }
  const double duration = (x_end - x_start) / v;
  using Vec = Eigen::Vector3cd;
  auto hamiltonian = [&](double t) {
    const PulseValues pv = evaluate_pulses(x_start + v * t, q);
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(0, 0) = pv.w_stark;
    h(1, 1) = -q.delta;
    const double pump = so.pump_off ? 0.0 : pv.omega_p;
    h(0, 1) = h(1, 0) = pump;
    h(1, 2) = h(2, 1) = pv.omega_s;
    return h;
  };
  auto rhs = [&](double t, const Vec& y) -> Vec { return cplx(0.0, -1.0) * (hamiltonian(t) * y); };
  Vec y(1.0, 0.0, 0.0);
  StirapResult r;
  r.duration = duration;
  std::size_t acc = 0, rej = 0;
  const double h0 = o.h_initial > 0.0 ? o.h_initial : 0.1 / (q.delta + 3.0 * q.omega0);
  dopri5(
      y, 0.0, duration, rhs, o, {}, [](double, const Vec&) {},
      [&](double, const Vec& s) { r.max_p2 = std::max(r.max_p2, std::norm(s(1))); }, h0, acc,
      rej, [](Eigen::Index i) { return "level " + std::to_string(i + 1); });
  r.p1 = std::norm(y(0));
  r.p2 = std::norm(y(1));
  r.p3 = std::norm(y(2));
  return r;
}

PhysicalParams dense_toy_params() {
  PhysicalParams p = desk_scale_params();
  p.waist_w = 3e-6;
  p.x_s = -14e-6;
  p.x_p = -8e-6;
  p.y_s = 8e-6;
  p.y_p = 14e-6;
  p.x0 = -24e-6;
  p.delta_l = 2e-6;
  p.v0 = 0.04;
  return p;
}

std::shared_ptr<const Grid> dense_toy_grid(const DerivedParams& d) {
  return Grid::make(-32.0, 32.0, 64, d.k0);
}

GaussianMoments free_gaussian_reference(double x0, double delta_l, double v0, double t,
                                        double hbar_over_m) {
  const double s = hbar_over_m * t / (delta_l * delta_l);
  return {x0 + v0 * t, delta_l * std::sqrt(1.0 + s * s)};
}

}  // namespace ads
