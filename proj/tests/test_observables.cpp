#include <doctest.h>

#include <cmath>

#include "ads/fp_env.hpp"
#include "ads/mcwf.hpp"
#include "ads/observables.hpp"
#include "ads/propagator.hpp"
#include "test_util.hpp"

using namespace ads;

namespace {

// Normalised Gaussian envelope in one component.
SpinorField packet(std::shared_ptr<const Grid> g, std::size_t c, double x0, double width, double k = 0) {
  SpinorField f(g);
  for (std::size_t j = 0; j < g->n_points; ++j) {
    const double y = g->x[j] - x0;
    f.at(c, j) = std::polar(std::exp(-y * y / (2 * width * width)), k * g->x[j]);
  }
  f.scale(1.0 / std::sqrt(norm2(f)));
  return f;
}

}  // namespace

TEST_CASE("populations of simple states") {
  const DerivedParams d = nondimensionalize(desk_scale_params());
  const auto g = Grid::make(-400, 400, 4096);
  const Populations p0 = populations(build_initial_state(g, d));
  CHECK(p0.p1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p0.p2 == 0.0);
  CHECK(p0.p3 == 0.0);
  CHECK(p0[1] == p0.p1);

  SpinorField eq(g);
  const SpinorField base = packet(g, 0, 0, 10);
  for (std::size_t c = 0; c < kComponents; ++c)
    for (std::size_t j = 0; j < g->n_points; ++j) eq.at(c, j) = base.at(0, j) / std::sqrt(6.0);
  const Populations pe = populations(eq);
  CHECK(pe.p1 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(pe.p2 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(pe.p3 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(photon_number(eq) == doctest::Approx(0.5).epsilon(1e-12));
  const auto w = component_weights(eq);
  for (double v : w) CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("reduced level densities integrate to the populations") {
  const auto g = Grid::make(-100, 100, 512);
  const SpinorField f = ads::testing::random_field(g, 21);
  const Populations p = populations(f);
  double total = 0;
  for (int level = 1; level <= 3; ++level) {
    const auto rho = level_density(f, level);
    double s = 0;
    for (double v : rho) s += v * g->dx;
    CHECK(s == doctest::Approx(p[level]).epsilon(1e-12));
    total += s;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean position and velocity") {
  const auto g = Grid::make(-200, 200, 2048);
  const SpinorField still = packet(g, 4, 37.5, 8.0);
  const auto pv = mean_position_and_velocity(still, 0.73);
  CHECK(pv.xbar == doctest::Approx(37.5).epsilon(1e-10));
  CHECK(std::abs(pv.v) < 1e-12);
  const SpinorField moving = packet(g, 4, -20.0, 8.0, 3.0);
  CHECK(mean_position_and_velocity(moving, 0.73).v == doctest::Approx(0.73 * 3.0).epsilon(1e-10));
  const Moments m = moments(moving);
  CHECK(m.norm == doctest::Approx(1.0));
  CHECK(m.k_moment == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("the two velocity estimators agree on a smooth trajectory") {
  PhysicalParams pp = desk_scale_params();
  pp.kappa = 0;
  const DerivedParams d = nondimensionalize(pp);
  const auto g = Grid::make(-400, 400, 1024, d.k0);
  const StepPlan plan = make_step_plan(g, d, {}, 1e-3, 30.0);
  SpinorField f = build_initial_state(g, d);
  std::vector<double> t, x, v;
  for (std::size_t s = 0; s <= plan.n_steps; ++s) {
    if (s % 1000 == 0) {
      const auto pv = mean_position_and_velocity(f, d.hbar_over_m);
      t.push_back(s * plan.dt);
      x.push_back(pv.xbar);
      v.push_back(pv.v);
    }
    if (s < plan.n_steps) strang_step(f, plan);
  }
  const auto fd = finite_difference(t, x);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) CHECK(std::abs(fd[i] - v[i]) <= 0.01 * std::abs(v[i]));
}

TEST_CASE("dark-state population limits") {
  const DerivedParams d = nondimensionalize(paper_default_params());
  const auto g = Grid::make(-400, 400, 4096);
  const ModelOptions o;
  const SpinorField left = packet(g, component_index(1, 0), -260, 10);
  CHECK(dark_state_population(left, StirapRegion::first_stirap, d, o) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(local_dark_state_population(left, d, o) == doctest::Approx(1.0).epsilon(1e-12));
  for (double x0 : {-260.0, -145.0, 0.0, 145.0}) {
    SpinorField excited = packet(g, component_index(2, 0), x0, 10);
    CHECK(dark_state_population(excited, StirapRegion::first_stirap, d, o) == 0.0);
    CHECK(dark_state_population(excited, StirapRegion::second_stirap, d, o) == 0.0);
    excited = packet(g, component_index(2, 1), x0, 10);
    CHECK(local_dark_state_population(excited, d, o) == 0.0);
  }
  // Where the Stokes and pump couplings are equal the dark direction is (|1> - |3>)/sqrt(2).
  const double mid = -145.0;
  SpinorField mix(g);
  const SpinorField base = packet(g, 0, mid, 0.5);
  for (std::size_t j = 0; j < g->n_points; ++j) {
    mix.at(component_index(1, 0), j) = base.at(0, j) / std::sqrt(2.0);
    mix.at(component_index(3, 0), j) = -base.at(0, j) / std::sqrt(2.0);
  }
  CHECK(dark_state_population(mix, StirapRegion::first_stirap, d, o) == doctest::Approx(1.0).epsilon(1e-3));
  for (std::size_t j = 0; j < g->n_points; ++j) mix.at(component_index(3, 0), j) *= -1.0;
  CHECK(dark_state_population(mix, StirapRegion::first_stirap, d, o) < 1e-3);
}

TEST_CASE("transmission and side partition") {
  const auto g = Grid::make(-400, 400, 4096);
  const SpinorField inside = packet(g, 0, 50, 10);
  CHECK(transmission(inside, Direction::positive, 200) < 1e-90);
  CHECK(transmission(inside, Direction::negative, 200) < 1e-90);
  const SpinorField beyond = packet(g, 4, 300, 10);
  CHECK(transmission(beyond, Direction::positive, 200) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(transmission(beyond, Direction::negative, 200) == 0.0);
  const SideWeights s = partition(beyond, Direction::negative, 200);
  CHECK(s.reflected == doctest::Approx(1.0).epsilon(1e-12));

  const SpinorField r = ads::testing::random_field(g, 4);
  for (Direction dir : {Direction::positive, Direction::negative}) {
    const SideWeights w = partition(r, dir, 200);
    CHECK(std::abs(w.transmitted + w.reflected + w.inside - 1.0) < 1e-9);
    CHECK(w.transmitted == doctest::Approx(transmission(r, dir, 200)));
  }
}

TEST_CASE("absorbed weight counts as beyond the detector on its own side") {
  const auto g = Grid::make(-400, 400, 4096);
  SpinorField f = packet(g, 0, 0, 10);
  f.scale(std::sqrt(0.7));
  AbsorbedWeight a;
  a.high[4] = 0.2;
  a.low[0] = 0.1;
  a.park_high = 330;
  a.park_low = -330;
  CHECK(a.total() == doctest::Approx(0.3));
  const SideWeights w = partition(f, a, Direction::positive, 200);
  CHECK(w.transmitted == doctest::Approx(0.2));
  CHECK(w.reflected == doctest::Approx(0.1));
  CHECK(w.inside == doctest::Approx(0.7));
  const SideWeights b = partition(f, a, Direction::negative, 200);
  CHECK(b.transmitted == doctest::Approx(0.1));
  CHECK(b.reflected == doctest::Approx(0.2));

  const DerivedParams d = nondimensionalize(desk_scale_params());
  const ObservableSample s = sample_observables(f, a, 1.5, d, {});
  CHECK(s.t == 1.5);
  CHECK(s.p1 == doctest::Approx(0.8));
  CHECK(s.p3 == doctest::Approx(0.2));
  CHECK(s.p1 + s.p2 + s.p3 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.norm == doctest::Approx(0.7));
  // Parked weight sits at the inner layer edges.
  CHECK(s.xbar == doctest::Approx(0.2 * 330 - 0.1 * 330).epsilon(1e-9));
  a.scale(0.5);
  CHECK(a.total() == doctest::Approx(0.15));
}

TEST_CASE("observable sample of the forward initial state") {
  const DerivedParams d = nondimensionalize(desk_scale_params());
  const auto g = Grid::make(-400, 400, 1024, d.k0);
  const ObservableSample s = sample_observables(build_initial_state(g, d), {}, 0.0, d, {});
  CHECK(s.p1 == doctest::Approx(1.0));
  CHECK(s.xbar == doctest::Approx(-260.0).epsilon(1e-9));
  CHECK(s.v == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.photon_number == 0.0);
  CHECK(s.dark_pop == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.norm == doctest::Approx(1.0));
}

TEST_CASE("first transfer completes at desk scale with a flat velocity") {
  PhysicalParams pp = desk_scale_params();
  pp.kappa = 0;
  const DerivedParams d = nondimensionalize(pp);
  const auto g = Grid::make(-400, 400, 1024, d.k0);
  const StepPlan plan = make_step_plan(g, d, {}, 1e-3, 52.0);
  SpinorField f = build_initial_state(g, d);
  ScopedFlushToZero ftz;
  double worst = 0;
  for (std::size_t s = 0; s < plan.n_steps; ++s) {
    strang_step(f, plan);
    if (s % 2000 == 0) worst = std::max(worst, std::abs(mean_position_and_velocity(f, d.hbar_over_m).v - d.v0));
  }
  CHECK(populations(f).p3 >= 0.98);
  CHECK(worst <= 0.02 * d.v0);
  CHECK(std::abs(mean_position_and_velocity(f, d.hbar_over_m).xbar) < 1.0);
}
