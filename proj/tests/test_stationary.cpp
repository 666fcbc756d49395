#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/initial.hpp"
#include "raftsim/spectral.hpp"
#include "raftsim/stationary.hpp"

using namespace raftsim;

namespace {

constexpr double kGoldenU = 0.61803398874989485;  // (-1 + sqrt 5) / 2
constexpr double kGoldenV = 0.38196601125010515;  // (3 - sqrt 5) / 2

SurfaceField noise_mean_free(const TorusGeometry& g, double amp, std::uint64_t seed,
                             std::uint64_t stream = 0) {
  return mean_free_project(ic_surface_noise(g, 0.0, amp, seed, stream));
}

// Independent evaluation of the monotone operator through public spectral
// helpers only: -eps Lap phi + (4/eps) P dealias((phi + m_bar)^3).
SurfaceField apply_monotone(const SurfaceField& phi, double eps, double m_bar) {
  const TorusGeometry& g = phi.geometry();
  const std::vector<double>& pv = phi.values();
  std::vector<double> cube(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double s = pv[i] + m_bar;
    cube[i] = s * s * s;
  }
  const SurfaceField c = dealias_cubic(SurfaceField::from_values(g, std::move(cube)));
  const SurfaceField lap = laplace_beltrami(phi);
  return mean_free_project(add_scaled(scale(lap, -eps), 4.0 / eps, c));
}

ReducedState march(ReducedState st, const ModelParams& p, const ExchangeLaw& law, int steps) {
  for (int i = 0; i < steps; ++i) st = step_reduced(st, p, law);
  return st;
}

// Mean-free view of a reduced state with the constitutive theta, for feeding
// time-marched states into the residual check.
StationarySolution view_of(const ReducedState& st, double delta) {
  StationarySolution s;
  s.phi = mean_free_project(st.phi);
  s.v = mean_free_project(st.v);
  s.theta = add_scaled(scale(s.v, 4.0 / delta), -2.0 / delta, s.phi);
  s.u_mean = st.u;
  s.v_mean = surface_mean(st.v);
  return s;
}

}  // namespace

TEST_CASE("mean value solve: unit configuration hits the closed-form pair") {
  const TorusGeometry g(16, 1.0);
  const ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};

  const SurfaceField zero = SurfaceField::constant(g, 0.0);
  auto [u, vbar] = mean_value_solve(law, zero, 1.0, 1.0, 1.0);
  CHECK(std::abs(u - kGoldenU) <= 1e-14);
  CHECK(std::abs(vbar - kGoldenV) <= 1e-14);
  CHECK(std::abs(1.0 * u + 1.0 * vbar - 1.0) <= 1e-14);

  // Only the mean of v_tilde matters for the plain law, and int_G q vanishes
  // at the returned pair.
  const SurfaceField vt = noise_mean_free(g, 0.3, 21);
  auto [u2, vbar2] = mean_value_solve(law, vt, 1.0, 1.0, 1.0);
  CHECK(std::abs(u2 - u) <= 1e-13);
  CHECK(std::abs(vbar2 - vbar) <= 1e-13);
  const SurfaceField v_full = add(vt, SurfaceField::constant(g, vbar2));
  const SurfaceField th = SurfaceField::constant(g, 0.0);
  CHECK(std::abs(q_surface_integral(law, u2, v_full, th)) <= 1e-13);
}

TEST_CASE("mean value solve: zero combined mass pins both means at zero") {
  const TorusGeometry g(8, 1.0);
  const SurfaceField vt = noise_mean_free(g, 0.2, 3);
  {
    auto [u, vbar] = mean_value_solve(NonEquilibriumLaw{1.5, 0.5}, vt, 0.0, 2.0, 1.0);
    CHECK(u == 0.0);
    CHECK(vbar == 0.0);
  }
  {
    auto [u, vbar] =
        mean_value_solve(CutoffNonEquilibriumLaw{1.5, 0.5, {0.8, 0.4}}, vt, 0.0, 2.0, 1.0);
    CHECK(u == 0.0);
    CHECK(vbar == 0.0);
  }
}

TEST_CASE("mean value solve: cutoff bisection satisfies both conditions") {
  const TorusGeometry g(16, 1.5);
  const double area = g.area();
  const SurfaceField vt = noise_mean_free(g, 0.25, 7);

  // A cutoff whose identity range covers [0, M/|B|] reduces to the plain law.
  {
    const CutoffNonEquilibriumLaw wide{1.0, 1.0, {10.0, 1.0}};
    auto [u, vbar] = mean_value_solve(ExchangeLaw{wide}, vt, 1.0, 1.0, area);
    auto [up, vbarp] = mean_value_solve(NonEquilibriumLaw{1.0, 1.0}, vt, 1.0, 1.0, area);
    CHECK(std::abs(u - up) <= 1e-12);
    CHECK(std::abs(vbar - vbarp) <= 1e-12);
  }

  // A genuinely saturating cutoff: verify the defining equations directly.
  {
    const CutoffNonEquilibriumLaw law{1.4, 0.6, {0.3, 0.2}};
    const double M = 1.2, volB = 1.5;
    auto [u, vbar] = mean_value_solve(ExchangeLaw{law}, vt, M, volB, area);
    CHECK(u >= 0.0);
    CHECK(u <= M / volB);
    CHECK(std::abs(volB * u + area * vbar - M) <= 1e-13 * (1.0 + M));
    const SurfaceField v_full = add(vt, SurfaceField::constant(g, vbar));
    const SurfaceField th = SurfaceField::constant(g, 0.0);
    CHECK(std::abs(q_surface_integral(ExchangeLaw{law}, u, v_full, th)) <= 1e-12);
  }
}

TEST_CASE("mean value solve: rejects what it cannot close") {
  const TorusGeometry g(8, 1.0);
  const SurfaceField zero = SurfaceField::constant(g, 0.0);
  CHECK_THROWS_AS(mean_value_solve(EquilibriumLaw{1.0}, zero, 1.0, 1.0, 1.0),
                  ConditionViolatedError);
  CHECK_THROWS_AS(mean_value_solve(NonEquilibriumLaw{}, zero, -0.5, 1.0, 1.0),
                  ConditionViolatedError);
  CHECK_THROWS_AS(mean_value_solve(NonEquilibriumLaw{}, SurfaceField::constant(g, 0.2), 1.0, 1.0,
                                   1.0),
                  ConfigError);
  CHECK_THROWS_AS(mean_value_solve(NonEquilibriumLaw{}, zero, 1.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("newton solve: zero data returns the zero solution") {
  const TorusGeometry g(16, 1.0);
  const SurfaceField zero = SurfaceField::constant(g, 0.0);
  const SurfaceField a = newton_semilinear(zero, 0.5, 1e-12);
  CHECK(max_abs(a) == 0.0);

  const SurfaceField start = noise_mean_free(g, 0.7, 4);
  const SurfaceField b = newton_semilinear(zero, 0.5, 1e-12, 0.0, &start);
  CHECK(max_abs(b) <= 1e-11);
}

TEST_CASE("newton solve: small data agrees with the screened Poisson solve") {
  const TorusGeometry g(32, 1.0);
  const SurfaceField f = mean_free_project(ic_surface_smooth(g, 0.0, 1e-4));
  const SurfaceField phi = newton_semilinear(f, 0.3, 1e-13);
  const SurfaceField lin = solve_surface_helmholtz(0.0, 0.3, f);
  CHECK(sup_distance(phi, lin) <= 1e-10);
}

TEST_CASE("newton solve: returned solution reproduces the data to tolerance") {
  const TorusGeometry g(32, 1.0);
  const SurfaceField f = mean_free_project(
      add(ic_surface_smooth(g, 0.0, 1.5), ic_surface_noise(g, 0.0, 0.4, 9, 1)));
  const double eps = 0.08, m_bar = -0.3, tol = 1e-11;
  const SurfaceField phi = newton_semilinear(f, eps, tol, m_bar);
  CHECK(std::abs(phi.mean()) <= 1e-13);
  CHECK(sup_distance(apply_monotone(phi, eps, m_bar), f) <= 2e-11);
}

TEST_CASE("newton solve: the start does not matter") {
  const TorusGeometry g(32, 1.0);
  const SurfaceField f = mean_free_project(
      add(ic_surface_smooth(g, 0.0, 1.5), ic_surface_noise(g, 0.0, 0.4, 9, 1)));
  const double eps = 0.08, tol = 1e-11;
  const SurfaceField a = newton_semilinear(f, eps, tol, -0.3);
  const SurfaceField start = noise_mean_free(g, 1.0, 5);
  const SurfaceField b = newton_semilinear(f, eps, tol, -0.3, &start);
  CHECK(sup_distance(a, b) <= 10.0 * tol);
}

TEST_CASE("newton solve: rejects bad data") {
  const TorusGeometry g(8, 1.0);
  CHECK_THROWS_AS(newton_semilinear(SurfaceField::constant(g, 0.3), 0.1, 1e-10),
                  SingularSystemError);
  SurfaceField bad = SurfaceField::constant(g, 0.0);
  bad.mutable_values()[3] = std::nan("");
  CHECK_THROWS_AS(newton_semilinear(bad, 0.1, 1e-10), ConfigError);
  const SurfaceField zero = SurfaceField::constant(g, 0.0);
  CHECK_THROWS_AS(newton_semilinear(zero, 0.0, 1e-10), ConfigError);
  CHECK_THROWS_AS(newton_semilinear(zero, 0.1, 0.0), ConfigError);
}

TEST_CASE("homogeneous branch: zero start converges immediately to machine residuals") {
  const TorusGeometry g(32, 1.0);
  StationaryConfig cfg;
  cfg.m = 0.3;
  cfg.M = 1.0;
  cfg.law = NonEquilibriumLaw{1.0, 1.0};
  cfg.p.eps = 0.1;
  cfg.p.delta = 0.2;
  cfg.tol = 1e-12;

  const StationarySolution sol = fixed_point_iterate(cfg, SurfaceField::constant(g, 0.0));
  CHECK(sol.iterations <= 2);
  CHECK(sol.residuals.max() <= 1e-12);
  CHECK(max_abs(sol.phi) <= 1e-13);
  CHECK(max_abs(sol.v) <= 1e-13);
  CHECK(max_abs(sol.theta) <= 1e-13);
  CHECK(std::abs(sol.u_mean - kGoldenU) <= 1e-12);
  CHECK(std::abs(sol.v_mean - kGoldenV) <= 1e-12);

  const ReducedState st = as_reduced_state(sol, cfg);
  CHECK(std::abs(surface_mean(st.phi) - 0.3) <= 1e-14);
  CHECK(st.u == sol.u_mean);
  CHECK(std::abs(masses(st).M_total - cfg.M) <= 1e-13);
  CHECK(st.bulk_volume == cfg.bulk_volume);
}

TEST_CASE("fixed point iteration: rejects bad configs and reports non-convergence") {
  const TorusGeometry g(16, 1.0);
  const SurfaceField zero = SurfaceField::constant(g, 0.0);

  StationaryConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(fixed_point_iterate(cfg, zero), ConfigError);
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(fixed_point_iterate(cfg, zero), ConfigError);
  cfg.alpha = 0.5;

  StationaryConfig eq = cfg;
  eq.law = EquilibriumLaw{1.0};
  CHECK_THROWS_AS(fixed_point_iterate(eq, zero), ConditionViolatedError);

  CHECK_THROWS_AS(fixed_point_iterate(cfg, SurfaceField::constant(g, 0.4)), ConfigError);

  StationaryConfig capped = cfg;
  capped.tol = 1e-16;
  capped.max_iters = 2;
  const SurfaceField vt = noise_mean_free(g, 0.3, 13);
  try {
    fixed_point_iterate(capped, vt);
    CHECK(false);
  } catch (const NonConvergenceError& e) {
    CHECK(e.residual_history().size() == 2);
    CHECK(e.residual_history().back() > 0.0);
  }
}

TEST_CASE("a marched pattern polishes to a machine-accurate stationary state") {
  const TorusGeometry g(32, 1.0);
  const double area = g.area();
  ModelParams p;
  p.eps = 0.12;
  p.delta = 0.15;
  p.dt = 1e-4;
  const ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  const double M = 1.0, volB = 1.0, m = -0.3 * area;

  // March the reduced dynamics into a nontrivial near-steady pattern.
  ReducedState st;
  st.phi = ic_surface_noise(g, 0.0, 0.2, 11, 0);
  st.phi.mutable_coeffs()[0] = m / area;  // pin the prescribed mass exactly
  st.v = slaved_v(st.phi, 0.35);
  st.u = (M - 0.35) / volB;
  st.bulk_volume = volB;
  st = march(std::move(st), p, law, 15000);

  // The noisy early state must trip the residual detector.
  StationaryConfig cfg;
  cfg.m = m;
  cfg.M = M;
  cfg.law = law;
  cfg.p = p;
  cfg.bulk_volume = volB;
  cfg.tol = 1e-10;
  cfg.max_iters = 400;

  const SurfaceField phi_mf = mean_free_project(st.phi);
  const SurfaceField v_mf = mean_free_project(st.v);
  const StationarySolution sol = fixed_point_iterate(cfg, v_mf, &phi_mf);

  CHECK(sol.residuals.mu <= cfg.tol);
  CHECK(sol.residuals.v_equation <= cfg.tol);
  CHECK(sol.residuals.constitutive <= cfg.tol);
  CHECK(sol.residuals.q_mean <= cfg.tol);
  CHECK(sol.residuals.mass <= cfg.tol);
  CHECK(max_abs(sol.phi) >= 0.3);  // genuinely nontrivial pattern
  CHECK(std::abs(sol.phi.mean()) <= 1e-12);
  CHECK(std::abs(sol.v.mean()) <= 1e-12);
  CHECK(std::abs(sol.theta.mean()) <= 1e-12);

  // Fixed-point property: one further undamped sweep stays converged and
  // moves v by no more than a few multiples of the tolerance.
  StationaryConfig undamped = cfg;
  undamped.alpha = 1.0;
  undamped.max_iters = 1;
  const StationarySolution resweep = fixed_point_iterate(undamped, sol.v, &sol.phi);
  CHECK(sup_distance(resweep.v, sol.v) <= 10.0 * cfg.tol);

  // Embedded as a reduced state, the solution is a fixed point of the time
  // stepper.
  const ReducedState st0 = as_reduced_state(sol, cfg);
  ReducedState stn = st0;
  for (int i = 0; i < 100; ++i) stn = step_reduced(stn, p, law);
  CHECK(sup_distance(stn.phi, st0.phi) <= 1e-8);
  CHECK(sup_distance(stn.v, st0.v) <= 1e-8);
  CHECK(std::abs(stn.u - st0.u) <= 1e-10);

  // The re-marched state feeds back through the verification-only report.
  const StationaryResiduals after = stationary_residuals(view_of(stn, p.delta), cfg);
  CHECK(after.max() <= 1e-8);
}

TEST_CASE("stationary residuals: detector is not vacuous") {
  const TorusGeometry g(32, 1.0);
  StationaryConfig cfg;
  cfg.m = 0.0;
  cfg.M = 1.0;
  cfg.p.eps = 0.1;
  cfg.p.delta = 0.2;

  ReducedState st;
  st.phi = mean_free_project(ic_surface_noise(g, 0.0, 0.5, 17, 0));
  st.v = slaved_v(st.phi, 0.3);
  st.u = 0.4;
  const StationaryResiduals r = stationary_residuals(view_of(st, cfg.p.delta), cfg);
  CHECK(r.max() > 1e-2);

  // The mass entry reports the combined-mass mismatch directly.
  StationaryConfig shifted = cfg;
  shifted.M = 1.0 + 0.05;
  const StationaryResiduals r2 = stationary_residuals(view_of(st, cfg.p.delta), shifted);
  CHECK(std::abs(r2.mass - (r.mass + 0.05)) <= 1e-12);
}
