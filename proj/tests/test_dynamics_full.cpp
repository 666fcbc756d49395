#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "raftsim/dynamics_full.hpp"
#include "raftsim/initial.hpp"
#include "raftsim/rng.hpp"
#include "raftsim/spectral.hpp"

using namespace raftsim;

namespace {

SurfaceField noisy_constant(const TorusGeometry& g, double mean, double amp, std::uint64_t seed,
                            std::uint64_t stream) {
  NoiseRng rng(seed, stream);
  std::vector<double> v(g.size());
  for (double& x : v) x = mean + amp * rng.uniform_pm1();
  return SurfaceField::from_values(g, std::move(v));
}

BulkField noisy_bulk(const SlabGeometry& s, double mean, double amp, std::uint64_t seed,
                     std::uint64_t stream) {
  NoiseRng rng(seed, stream);
  std::vector<double> v(s.size());
  for (double& x : v) x = mean + amp * rng.uniform_pm1();
  return BulkField::from_samples(s, v);
}

// Random state with v slaved to phi (so the relaxation term starts at zero).
FullState make_state(const SlabGeometry& sg, double phi_mean, double u0, std::uint64_t seed) {
  FullState st;
  st.t = 0.0;
  st.phi = noisy_constant(sg.base, phi_mean, 0.05, seed, 0);
  std::vector<double> vv(st.phi.values());
  for (double& x : vv) x = 0.5 * (1.0 + x);
  st.v = SurfaceField::from_values(sg.base, std::move(vv));
  st.u = noisy_bulk(sg, u0, 0.05, seed, 1);
  return st;
}

double composite_l2(const FullState& a, const FullState& b) {
  double e = l2_distance(a.phi, b.phi);
  double ev = l2_distance(a.v, b.v);
  const std::vector<cplx>& ua = a.u.coeffs();
  const std::vector<cplx>& ub = b.u.coeffs();
  std::vector<cplx> du(ua.size());
  for (std::size_t i = 0; i < ua.size(); ++i) du[i] = ua[i] - ub[i];
  double eu = std::sqrt(bulk_l2_norm_sq(BulkField::from_coeffs(a.u.geometry(), std::move(du))));
  return std::sqrt(e * e + ev * ev + eu * eu);
}

}  // namespace

TEST_CASE("potentials vanish at the pure-phase rest states") {
  TorusGeometry g(16, 1.0);
  ModelParams p;
  p.eps = 0.3;
  p.delta = 0.2;

  FullState st;
  st.phi = SurfaceField::constant(g, -1.0);
  st.v = SurfaceField::constant(g, 0.0);
  st.u = BulkField::constant(SlabGeometry(g, 1.0, 2), 0.0);
  auto [mu, theta] = potentials(st, p);
  CHECK(max_abs(mu) <= 1e-13);
  CHECK(max_abs(theta) <= 1e-13);

  st.phi = SurfaceField::constant(g, 0.0);
  st.v = SurfaceField::constant(g, 0.5);
  auto [mu2, theta2] = potentials(st, p);
  CHECK(max_abs(mu2) <= 1e-13);
  CHECK(max_abs(theta2) <= 1e-13);
}

TEST_CASE("potentials at a shifted homogeneous state") {
  TorusGeometry g(8, 1.0);
  ModelParams p;
  p.eps = 1.0;
  p.delta = 1.0;
  FullState st;
  st.phi = SurfaceField::constant(g, 0.5);
  st.v = SurfaceField::constant(g, 0.0);
  st.u = BulkField::constant(SlabGeometry(g, 1.0, 2), 0.0);
  auto [mu, theta] = potentials(st, p);
  // s = -3/2, W'(1/2) = -3/2, so mu = -3/2 + 3/2 = 0 and theta = -3
  CHECK(max_abs(mu) <= 1e-13);
  CHECK(sup_distance(theta, SurfaceField::constant(g, -3.0)) <= 1e-13);
}

TEST_CASE("energy of homogeneous states matches closed forms") {
  TorusGeometry g(16, 1.0);
  SlabGeometry sg(g, 1.0, 2);
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  ModelParams p;

  FullState st;
  st.u = BulkField::constant(sg, 0.0);
  st.phi = SurfaceField::constant(g, 1.0);
  st.v = SurfaceField::constant(g, 1.0);
  p.eps = 0.7;
  p.delta = 0.3;
  CHECK(std::abs(energy(st, p, law).F) <= 1e-14);

  st.phi = SurfaceField::constant(g, 0.0);
  st.v = SurfaceField::constant(g, 0.5);
  p.eps = 1.0;
  CHECK(energy(st, p, law).F == doctest::Approx(g.area()).epsilon(1e-13));

  st.v = SurfaceField::constant(g, 0.0);
  p.delta = 1.0;
  CHECK(energy(st, p, law).F == doctest::Approx(1.5).epsilon(1e-13));

  // bulk part: u = 2 on the unit slab gives E_bulk = 2
  st.u = BulkField::constant(sg, 2.0);
  CHECK(energy(st, p, law).E_bulk == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("imex step conserves phi mass exactly and combined mass tightly") {
  SlabGeometry sg(TorusGeometry(16, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.1;
  p.delta = 0.2;
  p.dt = 1e-3;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};

  FullState st = make_state(sg, -0.3, 0.8, 7);
  MassReport m0 = masses(st);
  for (int k = 0; k < 100; ++k) {
    st = step_imex(st, p, law);
    MassReport mk = masses(st);
    CHECK(std::abs(mk.m - m0.m) <= 1e-12 * sg.base.area());
    CHECK(std::abs(mk.M_total - m0.M_total) <= 1e-10 * (1.0 + std::abs(m0.M_total)));
  }
  CHECK(st.t == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("equilibrium exchange dissipates the total energy") {
  SlabGeometry sg(TorusGeometry(16, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.1;
  p.delta = 0.2;
  p.dt = 2e-4;
  ExchangeLaw law = EquilibriumLaw{1.0};

  FullState st = make_state(sg, -0.2, 0.5, 11);
  EnergyReport prev = energy(st, p, law);
  for (int k = 0; k < 50; ++k) {
    st = step_imex(st, p, law);
    EnergyReport cur = energy(st, p, law);
    CHECK(cur.E_total <= prev.E_total + 1e-9 * (1.0 + std::abs(prev.E_total)));
    CHECK(cur.exch <= 1e-12);
    prev = cur;
  }
}

// Band-limited initial data keeps every active mode in the asymptotic
// dt-regime of the first-order scheme at the measured step sizes.
static FullState make_smooth_state(const SlabGeometry& sg, double phi_mean, double u0) {
  FullState st;
  st.t = 0.0;
  st.phi = ic_surface_smooth(sg.base, phi_mean, 0.1);
  st.v = slaved_v(st.phi, surface_integral(scale(add(st.phi, SurfaceField::constant(sg.base, 1.0)),
                                                 0.5)));
  st.u = ic_bulk_smooth(sg, u0, 0.2);
  return st;
}

TEST_CASE("imex agrees with the reference integrator at first order") {
  SlabGeometry sg(TorusGeometry(8, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.15;
  p.delta = 0.2;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  FullState st0 = make_smooth_state(sg, -0.3, 0.5);

  const double T = 0.01;
  std::vector<double> dts = {4e-5, 2e-5, 1e-5};
  std::vector<double> errs;
  for (double dt : dts) {
    ModelParams pd = p;
    pd.dt = dt;
    long steps = std::lround(T / dt);
    FullState a = st0;
    for (long k = 0; k < steps; ++k) a = step_imex(a, pd, law);
    FullState b = reference_rk4(st0, p, law, dt / 100.0, steps * 100);
    errs.push_back(composite_l2(a, b));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order >= 0.9);
    CHECK(order <= 1.2);
  }
}

TEST_CASE("reference integrator shows fourth-order self convergence") {
  SlabGeometry sg(TorusGeometry(8, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.04;
  p.delta = 0.1;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  FullState st0 = make_smooth_state(sg, -0.3, 0.5);

  const double T = 2.56e-4;
  FullState y1 = reference_rk4(st0, p, law, T / 16.0, 16);
  FullState y2 = reference_rk4(st0, p, law, T / 32.0, 32);
  FullState y4 = reference_rk4(st0, p, law, T / 64.0, 64);
  double e12 = composite_l2(y1, y2);
  double e24 = composite_l2(y2, y4);
  double order = std::log2(e12 / e24);
  CHECK(order >= 3.6);
  CHECK(order <= 4.4);

  MassReport m0 = masses(st0);
  MassReport m1 = masses(y4);
  CHECK(std::abs(m1.m - m0.m) <= 1e-11);
  CHECK(std::abs(m1.M_total - m0.M_total) <= 1e-11 * (1.0 + std::abs(m0.M_total)));
}

TEST_CASE("reference integrator rejects large grids") {
  SlabGeometry sg(TorusGeometry(32, 1.0), 1.0, 4);
  ModelParams p;
  FullState st = make_state(sg, 0.0, 0.5, 19);
  CHECK_THROWS_AS(reference_rk4(st, p, NonEquilibriumLaw{1.0, 1.0}, 1e-5, 1), ConfigError);
}

TEST_CASE("energy balance residual is first order in dt") {
  SlabGeometry sg(TorusGeometry(16, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.1;
  p.delta = 0.2;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  FullState st = make_state(sg, -0.2, 0.6, 23);

  // settle a few steps so the state is smooth before measuring
  ModelParams ps = p;
  ps.dt = 1e-5;
  for (int k = 0; k < 20; ++k) st = step_imex(st, ps, law);

  auto residual_at = [&](double dt) {
    ModelParams pd = p;
    pd.dt = dt;
    FullState nxt = step_imex(st, pd, law);
    DissipationReport rep = dissipation_check(st, nxt, pd, law);
    return std::abs(rep.residual) / rep.scale;
  };
  double r1 = residual_at(2e-4);
  double r2 = residual_at(1e-4);
  double r4 = residual_at(5e-5);
  CHECK(r1 / r2 >= 1.5);
  CHECK(r1 / r2 <= 2.8);
  CHECK(r2 / r4 >= 1.5);
  CHECK(r2 / r4 <= 2.8);
}

TEST_CASE("rest state has zero dissipation residual and does not move") {
  SlabGeometry sg(TorusGeometry(16, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.2;
  p.delta = 0.4;
  p.dt = 1e-3;
  ExchangeLaw law = EquilibriumLaw{1.0};

  FullState st;
  st.phi = SurfaceField::constant(sg.base, -1.0);
  st.v = SurfaceField::constant(sg.base, 0.0);
  st.u = BulkField::constant(sg, 0.0);
  FullState nxt = step_imex(st, p, law);
  CHECK(sup_distance(st.phi, nxt.phi) <= 1e-14);
  CHECK(sup_distance(st.v, nxt.v) <= 1e-14);
  DissipationReport rep = dissipation_check(st, nxt, p, law);
  CHECK(std::abs(rep.residual) <= 1e-12);
}

TEST_CASE("blow-up data raises an integration failure") {
  SlabGeometry sg(TorusGeometry(8, 1.0), 1.0, 2);
  ModelParams p;
  p.dt = 1e-3;
  FullState st;
  st.phi = SurfaceField::constant(sg.base, 1e200);
  st.v = SurfaceField::constant(sg.base, 0.0);
  st.u = BulkField::constant(sg, 0.0);
  CHECK_THROWS_AS(step_imex(st, p, ExchangeLaw(NonEquilibriumLaw{1.0, 1.0})), IntegrationError);
}

TEST_CASE("imex runs a long horizon without losing finiteness") {
  SlabGeometry sg(TorusGeometry(16, 1.0), 1.0, 4);
  ModelParams p;
  p.eps = 0.1;
  p.delta = 0.2;
  p.dt = 1e-3;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  FullState st = make_state(sg, -0.4, 0.5, 29);
  for (int k = 0; k < 1000; ++k) st = step_imex(st, p, law);
  CHECK(st.phi.finite());
  CHECK(st.v.finite());
  CHECK(st.u.finite());
  CHECK(max_abs(st.phi) <= 2.0);
}
