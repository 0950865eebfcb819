#include <doctest.h>

#include <cmath>
#include <random>

#include "ads/hamiltonian.hpp"
#include "test_util.hpp"

using namespace ads;

namespace {

double gauss(double peak, double x, double c, double w) {
  return peak * std::exp(-(x - c) * (x - c) / (2 * w * w));
}

// Independent builder of the coupling matrix from the documented element list.
Matrix6c reference_hamiltonian(double x, const DerivedParams& p, const ModelOptions& o) {
  const double W = gauss(2 * p.omega0, x, 0, p.waist_w);
  const double os = gauss(p.omega0, x, p.x_s, p.waist_w);
  const double op = gauss(p.omega0, x, p.x_p, p.waist_w);
  const double gs = gauss(p.omega0, x, p.y_s, p.waist_w);
  const double gp = gauss(p.omega0, x, p.y_p, p.waist_w);
  Matrix6c h = Matrix6c::Zero();
  // Basis: 0=(1,0) 1=(1,1) 2=(2,0) 3=(2,1) 4=(3,0) 5=(3,1).
  h(0, 0) = h(1, 1) = W;
  if (o.detuning_placement == DetuningPlacement::excited_state) h(2, 2) = h(3, 3) = -p.delta;
  else h(4, 4) = h(5, 5) = p.delta;
  h(2, 4) = h(4, 2) = h(3, 5) = h(5, 3) = os + gp;
  h(2, 0) = h(0, 2) = h(3, 1) = h(1, 3) = op;
  if (o.cavity_ordering == CavityOrdering::jaynes_cummings) h(2, 1) = h(1, 2) = gs;
  else h(3, 0) = h(0, 3) = gs;
  return h;
}

double max_abs(const Matrix6c& m) { return m.cwiseAbs().maxCoeff(); }

double spectral_norm(const Matrix6c& m) {
  Eigen::JacobiSVD<Matrix6c> svd(m);
  return svd.singularValues()(0);
}

DerivedParams paper() { return nondimensionalize(paper_default_params()); }

}  // namespace

TEST_CASE("pulse stack at reference positions") {
  const DerivedParams p = paper();
  const PulseValues at0 = evaluate_pulses(0.0, p);
  CHECK(at0.w_stark == doctest::Approx(2 * p.omega0).epsilon(1e-15));
  for (double v : {at0.omega_s, at0.omega_p, at0.g_s, at0.g_p}) CHECK(v < 1e-15 * p.omega0);
  CHECK(at0.omega_p == doctest::Approx(p.omega0 * std::exp(-130.0 * 130.0 / 450.0)));

  const PulseValues atp = evaluate_pulses(-130.0, p);
  CHECK(atp.omega_p == doctest::Approx(p.omega0).epsilon(1e-15));

  for (double x = -300; x <= 300; x += 7.3) {
    const PulseValues a = evaluate_pulses(x, p), b = evaluate_pulses(-x, p);
    CHECK(a.omega_s == doctest::Approx(b.g_p).epsilon(1e-14));
    CHECK(a.omega_p == doctest::Approx(b.g_s).epsilon(1e-14));
    for (double v : {a.omega_s, a.omega_p, a.g_s, a.g_p}) {
      CHECK(v >= 0);
      CHECK(v <= p.omega0);
    }
    CHECK(a.w_stark >= 0);
    CHECK(a.w_stark <= 2 * p.omega0);
  }
}

TEST_CASE("tails below 1e-300 of the peak are flushed to zero") {
  const DerivedParams p = paper();
  const PulseValues far = evaluate_pulses(-3000.0, p);
  CHECK(far.w_stark == 0.0);
  CHECK(far.g_p == 0.0);
}

TEST_CASE("coupling matrix matches the independent builder") {
  const DerivedParams p = paper();
  for (auto det : {DetuningPlacement::excited_state, DetuningPlacement::level3_literal})
    for (auto cav : {CavityOrdering::jaynes_cummings, CavityOrdering::literal_paper}) {
      ModelOptions o;
      o.detuning_placement = det;
      o.cavity_ordering = cav;
      for (double x : {-260.0, -160.0, -145.0, -130.0, -20.0, 0.0, 20.0, 130.0, 145.0, 160.0}) {
        const CouplingMatrix m = assemble_coupling(x, p, o);
        CHECK(max_abs(m.hermitian_part - reference_hamiltonian(x, p, o)) <= 1e-10 * p.omega0);
        CHECK(max_abs(m.hermitian_part - m.hermitian_part.adjoint()) < 1e-14);
        CHECK(m.x == x);
        const std::array<double, 6> expected{0, p.kappa / 2, 0, p.kappa / 2, 0, p.kappa / 2};
        CHECK(m.decay_diagonal == expected);
      }
    }
}

TEST_CASE("far from every pulse only the detuning remains") {
  const DerivedParams p = paper();
  // 15 waists from the nearest pulse centre.
  const Matrix6c h = assemble_coupling(-390.0, p, {}).hermitian_part;
  // Excited-state placement carries -Delta so that E2 - E3 = -Delta.
  CHECK(h(2, 2).real() == doctest::Approx(-p.delta));
  CHECK(h(3, 3).real() == doctest::Approx(-p.delta));
  Matrix6c off = h;
  off(2, 2) = off(3, 3) = 0;
  CHECK(max_abs(off) < 1e-12 * p.omega0);
}

TEST_CASE("cavity element placement at the cavity Stokes centre") {
  const DerivedParams p = paper();
  const Matrix6c jc = assemble_coupling(130.0, p, {}).hermitian_part;
  CHECK(std::abs(jc(2, 1)) == doctest::Approx(p.omega0).epsilon(1e-14));
  CHECK(std::abs(jc(3, 0)) == 0.0);
  ModelOptions lit;
  lit.cavity_ordering = CavityOrdering::literal_paper;
  const Matrix6c lp = assemble_coupling(130.0, p, lit).hermitian_part;
  CHECK(std::abs(lp(3, 0)) == doctest::Approx(p.omega0).epsilon(1e-14));
  CHECK(std::abs(lp(2, 1)) == 0.0);
}

TEST_CASE("mode toggles change exactly the documented entries") {
  const DerivedParams p = paper();
  ModelOptions a, b;
  b.detuning_placement = DetuningPlacement::level3_literal;
  const Matrix6c ha = assemble_coupling(140.0, p, a).hermitian_part;
  const Matrix6c hb = assemble_coupling(140.0, p, b).hermitian_part;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const bool documented = r == c && r >= 2;
      CHECK((ha(r, c) != hb(r, c)) == documented);
    }
  ModelOptions l;
  l.cavity_ordering = CavityOrdering::literal_paper;
  const Matrix6c hl = assemble_coupling(140.0, p, l).hermitian_part;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const bool documented = (r == 2 && c == 1) || (r == 1 && c == 2) || (r == 3 && c == 0) ||
                              (r == 0 && c == 3);
      CHECK((ha(r, c) != hl(r, c)) == documented);
    }
}

TEST_CASE("lossless half-step factors are unitary and form a semigroup") {
  PhysicalParams pp = desk_scale_params();
  pp.kappa = 0.0;
  const DerivedParams p = nondimensionalize(pp);
  const double dt = 1e-3;
  for (double x : {-260.0, -150.0, -140.0, 0.0, 140.0, 150.0}) {
    const CouplingMatrix m = assemble_coupling(x, p, {});
    const Matrix6c f = half_step_factor(m, dt);
    CHECK(max_abs(f.adjoint() * f - Matrix6c::Identity()) < 1e-12);
    CHECK(max_abs(f * f - half_step_factor(m, 2 * dt)) < 1e-12);
    // Time reversal.
    CHECK(max_abs(f * half_step_factor(m, -dt) - Matrix6c::Identity()) < 1e-12);
  }
}

TEST_CASE("lossy factors never increase the norm") {
  const DerivedParams p = nondimensionalize(desk_scale_params());
  std::mt19937 rng(3);
  std::normal_distribution<double> n01;
  for (double x : {-150.0, 0.0, 140.0, 150.0}) {
    const Matrix6c f = half_step_factor(assemble_coupling(x, p, {}), 1e-3);
    CHECK(spectral_norm(f) <= 1.0 + 1e-12);
    for (int t = 0; t < 10; ++t) {
      Vector6c v;
      for (int i = 0; i < 6; ++i) v(i) = {n01(rng), n01(rng)};
      CHECK((f * v).norm() <= v.norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("decay-only factor is diagonal with exp(-kappa dt / 4) on photon-one entries") {
  PhysicalParams pp = desk_scale_params();
  pp.omega0 = 1e-300;
  DerivedParams p = nondimensionalize(pp);
  p.omega0 = 0.0;
  p.delta = 0.0;
  const double dt = 1e-3;
  const Matrix6c f = half_step_factor(assemble_coupling(10.0, p, {}), dt);
  Matrix6c expected = Matrix6c::Zero();
  const double d = std::exp(-p.kappa * dt / 4);
  for (int i = 0; i < 6; ++i) expected(i, i) = i % 2 ? d : 1.0;
  CHECK(max_abs(f - expected) < 1e-14);
}

TEST_CASE("two-level pump block reproduces the Rabi rotation") {
  PhysicalParams pp = desk_scale_params();
  pp.kappa = 0.0;
  pp.x_s = -5000e-6;
  pp.y_s = 5000e-6;
  pp.y_p = 6000e-6;
  DerivedParams p = nondimensionalize(pp);
  p.delta = 0.0;
  const double x = p.x_p;  // Omega_p = Omega0, everything else negligible
  const double dt = 2e-3;
  const Matrix6c f = half_step_factor(assemble_coupling(x, p, {}), dt);
  const double c = std::cos(p.omega0 * dt / 2), s = std::sin(p.omega0 * dt / 2);
  for (int j = 0; j < 2; ++j) {
    const int a = j, b = 2 + j;  // (1,j) and (2,j)
    CHECK(std::abs(f(a, a) - cplx(c, 0)) < 1e-12);
    CHECK(std::abs(f(b, b) - cplx(c, 0)) < 1e-12);
    CHECK(std::abs(f(a, b) - cplx(0, -s)) < 1e-12);
    CHECK(std::abs(f(b, a) - cplx(0, -s)) < 1e-12);
  }
  CHECK(std::abs(f(4, 4) - 1.0) < 1e-12);
}

TEST_CASE("precomputed factors store and apply the per-point matrices") {
  const DerivedParams p = nondimensionalize(desk_scale_params());
  const auto g = Grid::make(-200, 200, 64);
  const HalfStepFactors hs = precompute_half_step(*g, p, {}, 1e-3);
  CHECK(hs.n_points() == 64);
  CHECK(hs.dt() == 1e-3);
  for (std::size_t j = 0; j < 64; j += 5)
    CHECK(max_abs(hs.matrix(j) - half_step_factor(assemble_coupling(g->x[j], p, {}), 1e-3)) < 1e-15);

  SpinorField f = ads::testing::random_field(g, 9);
  SpinorField expected = f;
  for (std::size_t j = 0; j < 64; ++j) {
    Vector6c v;
    for (std::size_t c = 0; c < 6; ++c) v(c) = f.at(c, j);
    const Vector6c w = hs.matrix(j) * v;
    for (std::size_t c = 0; c < 6; ++c) expected.at(c, j) = w(c);
  }
  hs.apply(f);
  for (std::size_t i = 0; i < f.raw().size(); ++i) CHECK(std::abs(f.raw()[i] - expected.raw()[i]) < 1e-13);
}

TEST_CASE("half-step precompute rejects invalid steps") {
  const DerivedParams p = nondimensionalize(desk_scale_params());
  const auto g = Grid::make(-200, 200, 64);
  CHECK_THROWS_AS(precompute_half_step(*g, p, {}, 0.0), ValidationError);
  CHECK_THROWS_AS(precompute_half_step(*g, p, {}, -1e-3), ValidationError);  // lossy backwards
}
