#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "raftsim/dynamics_ok.hpp"
#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/initial.hpp"
#include "raftsim/spectral.hpp"

using namespace raftsim;

namespace {

SurfaceField cosine_mode(const TorusGeometry& g, double amp) {
  std::vector<double> v(g.size());
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1)
      v[static_cast<std::size_t>(i2) * g.n + i1] = amp * std::cos(2.0 * M_PI * i1 / g.n);
  return SurfaceField::from_values(g, std::move(v));
}

SurfaceField noise_mean_free(const TorusGeometry& g, double amp, std::uint64_t seed) {
  return mean_free_project(ic_surface_noise(g, 0.0, amp, seed, 0));
}

}  // namespace

TEST_CASE("sigma solve: zero field, eigenrelation, and singular input") {
  TorusGeometry g{16, 1.0};

  SurfaceField zero = SurfaceField::constant(g, 0.0);
  CHECK(max_abs(sigma_solve(zero, 0.3, 1.0, 1.0)) == 0.0);

  // (c1 u + c2)/2 = 1: sigma = -(2 pi)^{-2} cos(2 pi x)
  SurfaceField phi = cosine_mode(g, 1.0);
  SurfaceField sigma = sigma_solve(phi, 0.0, 1.0, 2.0);
  SurfaceField expect = cosine_mode(g, -1.0 / (4.0 * M_PI * M_PI));
  CHECK(sup_distance(sigma, expect) <= 1e-13);

  CHECK_THROWS_AS(sigma_solve(SurfaceField::constant(g, 1.0), 0.0, 1.0, 1.0),
                  SingularSystemError);
}

TEST_CASE("sigma solve residual on random mean-free data") {
  TorusGeometry g{32, 1.5};
  SurfaceField phi = noise_mean_free(g, 0.7, 13);
  const double u = 0.4, c1 = 1.3, c2 = 0.7;
  SurfaceField sigma = sigma_solve(phi, u, c1, c2);
  CHECK(std::abs(surface_mean(sigma)) <= 1e-14);

  SurfaceField lap = laplace_beltrami(sigma);
  const double c = 0.5 * (c1 * u + c2);
  const std::vector<double>& lv = lap.values();
  const std::vector<double>& pv = phi.values();
  double worst = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i)
    worst = std::max(worst, std::abs(lv[i] - c * pv[i]));
  CHECK(worst <= 1e-11 * max_abs(phi));
}

TEST_CASE("zero state stays zero while u follows the scalar equation") {
  TorusGeometry g{16, 1.0};
  ModelParams p;
  p.eps = 0.1;
  p.dt = 1e-3;
  const double c1 = 0.8, c2 = 1.1;
  OKState st;
  st.phi = SurfaceField::constant(g, 0.0);
  st.u = 0.2;
  st.bulk_volume = 1.3;
  st.total_mass = 0.81;
  double u_expect = st.u;
  for (int k = 0; k < 50; ++k) {
    st = step_ok(st, p, c1, c2);
    u_expect = u_expect +
               p.dt * u_rhs_closed_form(1.3 * u_expect, c1, c2, 0.81, 1.3, g.area()) / 1.3;
    CHECK(max_abs(st.phi) == 0.0);
    CHECK(std::abs(st.u - u_expect) <= 1e-14);
  }
}

TEST_CASE("discrete multiplier matches a tiny single-mode step") {
  TorusGeometry g{16, 1.0};
  ModelParams p;
  p.eps = 0.1;
  p.dt = 1e-4;
  const double u = 0.3, c1 = 1.0, c2 = 2.0, amp = 1e-8;
  OKState st;
  st.phi = cosine_mode(g, amp);
  st.u = u;
  OKState next = step_ok(st, p, c1, c2);
  const double lam = g.lambda(1, 0);
  const double ratio = next.phi.coeff(1, 0).real() / st.phi.coeff(1, 0).real();
  CHECK(std::abs(ratio - ok_step_multiplier(lam, u, p, c1, c2)) <= 1e-12);
}

TEST_CASE("multiplier exceeds one exactly when the growth rate is positive") {
  ModelParams p;
  p.eps = 0.1;
  p.dt = 1e-4;
  const double u = 0.5, c1 = 1.0, c2 = 1.0;
  bool saw_growth = false, saw_decay = false;
  for (int m = 1; m <= 8; ++m) {
    const double lam = 4.0 * M_PI * M_PI * m * m;
    const double rate = ok_growth_rate(lam, u, p, c1, c2);
    const double mult = ok_step_multiplier(lam, u, p, c1, c2);
    CHECK((mult > 1.0) == (rate > 0.0));
    saw_growth = saw_growth || rate > 0.0;
    saw_decay = saw_decay || rate < 0.0;
  }
  CHECK(saw_growth);
  CHECK(saw_decay);
}

TEST_CASE("the order parameter stays mean-free over 1000 steps") {
  TorusGeometry g{32, 1.0};
  ModelParams p;
  p.eps = 0.1;
  p.dt = 1e-4;
  OKState st;
  st.phi = noise_mean_free(g, 0.05, 21);
  st.u = 0.5;
  for (int k = 0; k < 1000; ++k) {
    st = step_ok(st, p, 1.0, 1.0);
    CHECK(std::abs(surface_integral(st.phi)) <= 1e-12);
  }
  CHECK(max_abs(st.phi) <= 2.0);
}

TEST_CASE("five-fourths relation against the reduced potentials") {
  TorusGeometry g{16, 1.0};
  ModelParams p;
  p.eps = 0.1;
  p.delta = 0.05;
  const double u = 0.4, c1 = 1.3, c2 = 0.7, vbar = 0.55;
  SurfaceField phi = noise_mean_free(g, 0.3, 9);

  SurfaceField sigma = sigma_solve(phi, u, c1, c2);

  // A = -eps Lap phi + eps^{-1} (dealiased, mean-projected) W'(phi)
  std::vector<double> wv(phi.values());
  for (double& x : wv) x = double_well_prime(x);
  SurfaceField w = dealias_cubic(SurfaceField::from_values(g, std::move(wv)));
  std::vector<cplx> ah(phi.coeffs());
  const std::vector<cplx>& wh = w.coeffs();
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * g.n + i1;
      ah[idx] = p.eps * g.lambda(i1, i2) * ah[idx] + wh[idx] / p.eps;
    }
  ah[0] = 0.0;
  SurfaceField bigA = SurfaceField::from_coeffs(g, std::move(ah));

  // mu of the limit model, and the theta that balances it
  SurfaceField mu_ok = bigA;
  {
    std::vector<cplx>& mh = mu_ok.mutable_coeffs();
    const std::vector<cplx>& sh = sigma.coeffs();
    for (std::size_t i = 0; i < mh.size(); ++i) mh[i] = 0.8 * (mh[i] - 0.5 * sh[i]);
  }
  SurfaceField theta_star = sigma;
  {
    std::vector<cplx>& th = theta_star.mutable_coeffs();
    const std::vector<cplx>& mh = mu_ok.coeffs();
    for (std::size_t i = 0; i < th.size(); ++i) th[i] += 0.5 * mh[i];
  }

  // a reduced state whose relaxation variable realizes exactly that theta
  std::vector<cplx> vh(theta_star.coeffs());
  const std::vector<cplx>& ph = phi.coeffs();
  for (std::size_t i = 0; i < vh.size(); ++i) vh[i] = 0.25 * p.delta * vh[i] + 0.5 * ph[i];
  vh[0] = vbar;
  ReducedState st;
  st.u = u;
  st.phi = phi;
  st.v = SurfaceField::from_coeffs(g, std::move(vh));

  MeanFreeView view = decompose_mean_free(st, p);
  CHECK(sup_distance(view.theta_mf, theta_star) <= 1e-12 * (1.0 + max_abs(theta_star)));
  CHECK(sup_distance(view.mu_mf, mu_ok) <= 1e-12 * (1.0 + max_abs(mu_ok)));
}

TEST_CASE("sweep harness: zero perturbation and duplicate deltas") {
  SweepConfig cfg;
  cfg.n = 16;
  cfg.eps = 0.1;
  cfg.dt = 1e-3;
  cfg.t_end = 0.02;
  cfg.noise_amp = 0.0;
  std::vector<DeltaSweepRow> rows = delta_sweep(cfg, {0.2, 0.1, 0.05});
  REQUIRE(rows.size() == 3);
  for (const DeltaSweepRow& r : rows) {
    CHECK(r.error_l2 == 0.0);
    CHECK(std::isfinite(r.u_final));
  }
  CHECK(rows[0].delta == 0.2);
  CHECK(rows[2].delta == 0.05);

  cfg.noise_amp = 0.05;
  rows = delta_sweep(cfg, {0.1, 0.1});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error_l2 == rows[1].error_l2);
  CHECK(rows[0].u_final == rows[1].u_final);
  CHECK(rows[0].error_l2 > 0.0);
}

TEST_CASE("reduced runs are reproducible") {
  SweepConfig cfg;
  cfg.n = 16;
  cfg.eps = 0.1;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  auto a = run_reduced_final(cfg, 0.1);
  auto b = run_reduced_final(cfg, 0.1);
  CHECK(l2_distance(a.first, b.first) == 0.0);
  CHECK(a.second == b.second);
}

TEST_CASE("limit-model steps reject broken states") {
  TorusGeometry g{8, 1.0};
  ModelParams p;
  p.eps = 0.1;
  p.dt = 1e-3;
  OKState st;
  st.phi = SurfaceField::constant(g, 0.0);
  st.u = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step_ok(st, p, 1.0, 1.0), IntegrationError);
  st.u = 0.0;
  st.phi = cosine_mode(g, 1e200);
  CHECK_THROWS_AS(step_ok(st, p, 1.0, 1.0), IntegrationError);
}
