#include <doctest.h>

#include <cmath>

#include "ads/observables.hpp"
#include "ads/oracle.hpp"
#include "test_util.hpp"

using namespace ads;

namespace {

DerivedParams decoupled() {
  PhysicalParams pp = desk_scale_params();
  pp.omega0 = 1e-300;
  DerivedParams d = nondimensionalize(pp);
  d.omega0 = 0.0;
  return d;
}

// Desk couplings squeezed onto a 16-point box so dense solves take milliseconds.
DerivedParams small_box() {
  DerivedParams d = nondimensionalize(dense_toy_params());
  d.x0_initial = 0.0;
  return d;
}

}  // namespace

TEST_CASE("dense state conversion keeps the amplitudes") {
  const auto g = Grid::make(-16, 16, 16);
  const SpinorField f = ads::testing::random_field(g, 1);
  const DenseState s = dense_from_field(f);
  CHECK(s.rho.rows() == 96);
  CHECK(trace_real(s) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(purity(s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hermiticity_error(s) < 1e-15);
  const SpinorField back = field_from_dense_vector(g, dense_vector(f));
  for (std::size_t i = 0; i < f.raw().size(); ++i) CHECK(std::abs(back.raw()[i] - f.raw()[i]) < 1e-15);
  const DenseSample ds = dense_sample(s);
  const Populations p = populations(f);
  CHECK(ds.p1 == doctest::Approx(p.p1));
  CHECK(ds.p3 == doctest::Approx(p.p3));
  CHECK(ds.photon == doctest::Approx(photon_number(f)));
  CHECK_THROWS_AS(dense_from_field(SpinorField(Grid::make(-16, 16, 128))), ValidationError);
}

TEST_CASE("dense Lindblad: free photon decays as exp(-kappa t)") {
  const DerivedParams d = decoupled();
  const auto g = Grid::make(-16, 16, 16, d.k0);
  SpinorField f(g);
  for (std::size_t j = 0; j < 16; ++j) f.at(component_index(3, 1), j) = std::exp(-g->x[j] * g->x[j] / 32);
  f.scale(1.0 / std::sqrt(norm2(f)));
  ModelOptions o;
  o.nonlinearity_on = false;
  const std::vector<double> ts{0.005, 0.01, 0.02};
  Dopri5Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const DenseRun r = dense_lindblad_evolve(dense_from_field(f), d, o, 0.02, ts, opt);
  REQUIRE(r.samples.size() == 3);
  for (const DenseSample& s : r.samples) {
    CHECK(std::abs(s.photon - std::exp(-d.kappa * s.t)) < 1e-6);
    CHECK(std::abs(s.trace - 1.0) < 1e-8);
    CHECK(s.p3 == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(hermiticity_error(r.final_state) < 1e-10);
  CHECK(min_eigenvalue(r.final_state) > -1e-8);
}

TEST_CASE("dense Lindblad without loss keeps a pure state pure and matches Schrodinger") {
  const DerivedParams d = [] {
    DerivedParams x = small_box();
    x.kappa = 0.0;
    return x;
  }();
  const auto g = Grid::make(-16, 16, 16, d.k0);
  const SpinorField f = ads::testing::random_field(g, 2);
  const std::vector<double> ts{0.01, 0.02, 0.03};
  Dopri5Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const ModelOptions o;  // nonlinearity on: the reference takes n(x) from diag(rho)
  const DenseRun lr = dense_lindblad_evolve(dense_from_field(f), d, o, 0.03, ts, opt);
  const PureRun pr = dense_schrodinger_evolve(f, d, o, 0.03, ts, opt);
  REQUIRE(lr.samples.size() == 3);
  REQUIRE(pr.samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(lr.samples[i].p1 - pr.samples[i].p1) < 1e-7);
    CHECK(std::abs(lr.samples[i].p2 - pr.samples[i].p2) < 1e-7);
    CHECK(std::abs(lr.samples[i].p3 - pr.samples[i].p3) < 1e-7);
  }
  CHECK(std::abs(purity(lr.final_state) - 1.0) < 1e-8);
  CHECK(std::abs(trace_real(lr.final_state) - 1.0) < 1e-8);
  CHECK(lr.accepted_steps > 0);
}

TEST_CASE("dense Lindblad with loss stays a valid density matrix") {
  const DerivedParams d = small_box();
  const auto g = Grid::make(-16, 16, 16, d.k0);
  SpinorField f = ads::testing::random_field(g, 3);
  Dopri5Options opt;
  opt.rtol = 1e-9;
  const DenseRun r = dense_lindblad_evolve(dense_from_field(f), d, {}, 0.05, {}, opt);
  CHECK(std::abs(trace_real(r.final_state) - 1.0) < 1e-8);
  CHECK(hermiticity_error(r.final_state) < 1e-10);
  CHECK(min_eigenvalue(r.final_state) > -1e-8);
  CHECK(purity(r.final_state) < 1.0);
}

TEST_CASE("adaptive integrator reports an exhausted step budget") {
  const DerivedParams d = small_box();
  const auto g = Grid::make(-16, 16, 16, d.k0);
  Dopri5Options opt;
  opt.max_steps = 3;
  CHECK_THROWS_AS(dense_lindblad_evolve(dense_from_field(ads::testing::random_field(g, 4)), d, {}, 1.0, {}, opt),
                  StepSizeUnderflow);
}

TEST_CASE("motionless STIRAP in the adiabatic, intuitive and pump-off cases") {
  const DerivedParams d = nondimensionalize(paper_default_params());
  const StirapResult good = motionless_stirap(d);
  CHECK(good.p3 >= 0.999);
  CHECK(good.max_p2 <= 1e-3);
  CHECK(good.p1 + good.p2 + good.p3 == doctest::Approx(1.0).epsilon(1e-8));
  // On resonance the intuitive order pumps through |2> and does not transfer.
  DerivedParams resonant = d;
  resonant.delta = 0.0;
  CHECK(motionless_stirap(resonant).p3 >= 0.999);
  StirapOptions wrong;
  wrong.intuitive_order = true;
  const StirapResult bright = motionless_stirap(resonant, wrong);
  CHECK(bright.p3 < 0.9);
  CHECK(bright.max_p2 > 0.5);
  StirapOptions off;
  off.pump_off = true;
  Dopri5Options tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-13;
  const StirapResult idle = motionless_stirap(d, off, tight);
  // |1> only carries its light shift, a phase the integrator follows to its tolerance.
  CHECK(std::abs(idle.p1 - 1.0) < 1e-8);
  CHECK(idle.p2 == 0.0);
  CHECK(idle.p3 == 0.0);
}

TEST_CASE("free Gaussian reference") {
  const auto at0 = free_gaussian_reference(-260, 10, 50, 0, 0.73);
  CHECK(at0.center == -260);
  CHECK(at0.width == 10);
  const double hbar_over_m = 0.7307;
  const auto spread = free_gaussian_reference(0, 10, 0, 100 / hbar_over_m, hbar_over_m);
  CHECK(spread.center == 0);
  CHECK(spread.width == doctest::Approx(10 * std::sqrt(2.0)).epsilon(1e-14));
  const auto paper = free_gaussian_reference(-260, 10, 50, 10, hbar_over_m);
  CHECK(paper.center == doctest::Approx(240));
  CHECK(paper.width / 10 == doctest::Approx(1.0027).epsilon(1e-4));
}

TEST_CASE("dense toy configuration fits the oracle limits") {
  const DerivedParams d = nondimensionalize(dense_toy_params());
  const auto g = dense_toy_grid(d);
  CHECK(g->n_points <= kDensePointLimit);
  CHECK_NOTHROW(build_initial_state(g, d));
  CHECK(d.kappa * 1e-4 <= 0.1);
}
