#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ads/field.hpp"
#include "ads/observables.hpp"
#include "ads/propagator.hpp"
#include "test_util.hpp"

using namespace ads;
using ads::testing::random_field;

namespace {

double max_abs_diff(const SpinorField& a, const SpinorField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

}  // namespace

TEST_CASE("grid spacing and FFT-ordered wavenumbers") {
  const auto g = Grid::make(-400, 400, 1024);
  CHECK(g->dx == doctest::Approx(800.0 / 1024).epsilon(1e-15));
  CHECK(g->x.front() == -400.0);
  CHECK(g->x[1] - g->x[0] == doctest::Approx(g->dx));
  const double dk = 2 * kPi / (1024 * g->dx);
  CHECK(g->k[0] == 0.0);
  CHECK(g->k[1] == doctest::Approx(dk));
  CHECK(g->k[511] == doctest::Approx(511 * dk));
  CHECK(g->k[512] == doctest::Approx(-512 * dk));
  CHECK(g->k[1023] == doctest::Approx(-dk));
  double kmax = 0;
  for (double k : g->k) kmax = std::max(kmax, std::abs(k));
  CHECK(kmax == doctest::Approx(kPi / g->dx));
  CHECK(g->k_max() == doctest::Approx(kPi / g->dx));

  const auto c = Grid::make(-400, 400, 1024, 6.0);
  for (std::size_t j = 0; j < 1024; ++j) CHECK(c->k[j] == doctest::Approx(6.0 + g->k[j]));
}

TEST_CASE("grid rejects sizes that are not powers of two") {
  CHECK_THROWS_AS(Grid::make(-1, 1, 1000), ValidationError);
  CHECK_THROWS_AS(Grid::make(-1, 1, 1), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, -1, 64), ValidationError);
  CHECK_NOTHROW(Grid::make(-1, 1, 64));
}

TEST_CASE("required grid sizes for the presets") {
  const DerivedParams paper = nondimensionalize(paper_default_params());
  const DerivedParams desk = nondimensionalize(desk_scale_params());
  CHECK(required_points(-400, 400, paper.k0, paper.delta_l) == 32768);
  CHECK(required_points(-400, 400, desk.k0, desk.delta_l) == 4096);
  // Co-moving band: only the envelope needs resolving.
  CHECK(required_points(-400, 400, desk.k0, desk.delta_l, desk.k0) <= 512);
}

TEST_CASE("initial state of the forward scenario") {
  const DerivedParams d = nondimensionalize(paper_default_params());
  const auto g = Grid::make(-400, 400, 32768);
  const SpinorField f = build_initial_state(g, d);
  CHECK(norm2(f) == doctest::Approx(1.0).epsilon(1e-12));
  const auto pv = mean_position_and_velocity(f, d.hbar_over_m);
  CHECK(pv.xbar == doctest::Approx(-260.0).epsilon(1e-9));
  CHECK(pv.v == doctest::Approx(50.0).epsilon(1e-9));
  const Populations p = populations(f);
  CHECK(p.p1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.p2 == 0.0);
  CHECK(p.p3 == 0.0);
  for (std::size_t c = 1; c < kComponents; ++c) CHECK(component_norm2(f, c) == 0.0);
}

TEST_CASE("initial state of the backward |3> scenario") {
  PhysicalParams pp = paper_default_params();
  pp.initial_level = Level::three;
  pp.initial_direction = Direction::negative;
  const DerivedParams d = nondimensionalize(pp);
  const auto g = Grid::make(-400, 400, 32768);
  const SpinorField f = build_initial_state(g, d);
  CHECK(component_norm2(f, component_index(3, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  const auto pv = mean_position_and_velocity(f, d.hbar_over_m);
  CHECK(pv.xbar == doctest::Approx(260.0).epsilon(1e-9));
  CHECK(pv.v == doctest::Approx(-50.0).epsilon(1e-9));
}

TEST_CASE("co-moving initial state has the lab-frame density and moments") {
  const DerivedParams d = nondimensionalize(desk_scale_params());
  const auto lab = Grid::make(-400, 400, 4096);
  const auto com = Grid::make(-400, 400, 4096, d.k0);
  const SpinorField a = build_initial_state(lab, d), b = build_initial_state(com, d);
  for (std::size_t j = 0; j < 4096; j += 7)
    CHECK(std::norm(a.at(0, j)) == doctest::Approx(std::norm(b.at(0, j))).epsilon(1e-12));
  const auto pa = mean_position_and_velocity(a, d.hbar_over_m);
  const auto pb = mean_position_and_velocity(b, d.hbar_over_m);
  CHECK(pb.v == doctest::Approx(pa.v).epsilon(1e-10));
  CHECK(pb.xbar == doctest::Approx(pa.xbar).epsilon(1e-12));
}

TEST_CASE("initial-state preconditions") {
  const DerivedParams d = nondimensionalize(paper_default_params());
  CHECK_THROWS_AS(build_initial_state(Grid::make(-400, 400, 8192), d), NyquistViolation);
  CHECK_THROWS_AS(build_initial_state(Grid::make(-250, 250, 32768), d), DomainTooSmall);
  try {
    build_initial_state(Grid::make(-400, 400, 8192), d);
  } catch (const NyquistViolation& e) {
    CHECK(std::string(e.what()).find("n_points") != std::string::npos);
  }
}

TEST_CASE("norm of fresh, scaled and empty fields") {
  const DerivedParams d = nondimensionalize(desk_scale_params());
  const auto g = Grid::make(-400, 400, 4096);
  SpinorField f = build_initial_state(g, d);
  CHECK(std::abs(norm2(f) - 1.0) < 1e-12);
  f.scale(0.5);
  CHECK(norm2(f) == doctest::Approx(0.25).epsilon(1e-12));
  f.set_zero();
  CHECK(norm2(f) == 0.0);
}

TEST_CASE("stationary real Gaussian has a symmetric momentum distribution") {
  PhysicalParams pp = paper_default_params();
  pp.v0 = 0.0;
  pp.x0 = 0.0;
  const DerivedParams d = nondimensionalize(pp);
  const auto g = Grid::make(-200, 200, 1024);
  const SpinorField m = to_momentum(build_initial_state(g, d));
  for (std::size_t j = 1; j < 512; ++j)
    CHECK(std::norm(m.at(0, j)) == doctest::Approx(std::norm(m.at(0, 1024 - j))).epsilon(1e-10));
  CHECK(mean_position_and_velocity(build_initial_state(g, d), d.hbar_over_m).v ==
        doctest::Approx(0.0));
}

TEST_CASE("plane wave lands in the bin nearest its wavenumber") {
  const auto g = Grid::make(-50, 50, 256);
  const double k0 = 2 * kPi * 17 / g->length() + 0.01;  // slightly off a bin centre
  SpinorField f(g);
  for (std::size_t j = 0; j < g->n_points; ++j) f.at(2, j) = std::polar(1.0, k0 * g->x[j]);
  f.scale(1.0 / std::sqrt(norm2(f)));
  const SpinorField m = to_momentum(f);
  std::size_t best = 0;
  for (std::size_t j = 0; j < g->n_points; ++j)
    if (std::norm(m.at(2, j)) > std::norm(m.at(2, best))) best = j;
  CHECK(best == 17);
  // Off-bin leakage follows the Dirichlet kernel.
  const double eps = 0.01 / g->dk, n = double(g->n_points);
  const double peak = std::pow(std::sin(kPi * eps) / (n * std::sin(kPi * eps / n)), 2);
  CHECK(std::norm(m.at(2, best)) * g->dk == doctest::Approx(peak).epsilon(1e-9));
  CHECK(peak > 0.9);
  for (std::size_t c : {0u, 1u, 3u, 4u, 5u}) CHECK(component_norm2(m, c) == 0.0);
}

TEST_CASE("transform pair is unitary and inverts exactly") {
  const auto g = Grid::make(-30, 30, 512, 2.5);
  const SpinorField f = random_field(g, 42);
  const SpinorField m = to_momentum(f);
  CHECK(m.representation() == Representation::momentum);
  CHECK(std::abs(norm2(m) - norm2(f)) < 1e-12);
  const SpinorField back = to_position(m);
  CHECK(max_abs_diff(back, f) < 1e-12);
  CHECK_THROWS(to_momentum(m));
  CHECK_THROWS(to_position(f));
}

TEST_CASE("Gaussian of width dl transforms to width 1/dl") {
  PhysicalParams pp = paper_default_params();
  pp.v0 = 0.0;
  pp.x0 = 0.0;
  pp.delta_l = 4e-6;
  const DerivedParams d = nondimensionalize(pp);
  const auto g = Grid::make(-100, 100, 4096);
  const SpinorField m = to_momentum(build_initial_state(g, d));
  // |phi(k)|^2 ~ exp(-k^2 dl^2): second moment 1 / (2 dl^2).
  double k2 = 0;
  for (std::size_t j = 0; j < g->n_points; ++j) k2 += g->k[j] * g->k[j] * std::norm(m.at(0, j)) * g->dk;
  const double width = std::sqrt(2.0 * k2);
  CHECK(std::abs(width - 1.0 / 4.0) / 0.25 < 0.01);
}

TEST_CASE("pure (2,1) state stays in its component with couplings off") {
  PhysicalParams pp = desk_scale_params();
  pp.omega0 = 1e-300;
  pp.kappa = 0.0;
  DerivedParams d = nondimensionalize(pp);
  d.omega0 = 0.0;
  d.delta = 0.0;
  ModelOptions opts;
  opts.nonlinearity_on = false;
  const auto g = Grid::make(-400, 400, 1024, d.k0);
  const SpinorField g0 = build_initial_state(g, d);
  SpinorField f(g);
  const std::size_t c21 = component_index(2, 1);
  for (std::size_t j = 0; j < g->n_points; ++j) f.at(c21, j) = g0.at(0, j);
  const SpinorField m = to_momentum(f);
  for (std::size_t c = 0; c < kComponents; ++c)
    if (c != c21) CHECK(component_norm2(m, c) == 0.0);
  const StepPlan plan = make_step_plan(g, d, opts, 1e-2, 2.0);
  for (std::size_t s = 0; s < plan.n_steps; ++s) strang_step(f, plan);
  for (std::size_t c = 0; c < kComponents; ++c)
    if (c != c21) CHECK(component_norm2(f, c) == 0.0);
  CHECK(component_norm2(f, c21) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("basis order helpers") {
  CHECK(component_index(1, 0) == 0);
  CHECK(component_index(1, 1) == 1);
  CHECK(component_index(2, 0) == 2);
  CHECK(component_index(2, 1) == 3);
  CHECK(component_index(3, 0) == 4);
  CHECK(component_index(3, 1) == 5);
  for (std::size_t c = 0; c < kComponents; ++c)
    CHECK(component_index(component_level(c), component_photons(c)) == c);
}
