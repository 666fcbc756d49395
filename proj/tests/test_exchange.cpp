#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "raftsim/exchange.hpp"
#include "raftsim/rng.hpp"
#include "raftsim/spectral.hpp"

using namespace raftsim;

namespace {

SurfaceField random_field(const TorusGeometry& g, std::uint64_t seed, double amp = 1.0) {
  NoiseRng rng(seed);
  std::vector<double> v(g.size());
  for (double& x : v) x = amp * rng.uniform_pm1();
  return SurfaceField::from_values(g, std::move(v));
}

}  // namespace

TEST_CASE("cutoff function is identity inside and saturates outside") {
  CutoffFunction cf{1.5, 0.75};
  CHECK(cf(0.3) == 0.3);
  CHECK(cf(-1.5) == -1.5);
  CHECK(cf(1.5) == 1.5);
  // odd symmetry and bound |eta| <= a + w
  for (double s : {0.1, 1.0, 2.0, 5.0, 100.0}) {
    CHECK(cf(-s) == doctest::Approx(-cf(s)).epsilon(1e-15));
    CHECK(std::abs(cf(s)) <= cf.a + cf.w + 1e-12);
  }
  // strictly increasing saturation branch
  CHECK(cf(2.0) > cf(1.6));
  CHECK(cf(100.0) == doctest::Approx(cf.a + cf.w).epsilon(1e-6));
}

TEST_CASE("cutoff function is C1 at the matching point") {
  CutoffFunction cf{2.0, 1.0};
  const double h = 1e-6;
  double dl = (eval_eta(cf, cf.a) - eval_eta(cf, cf.a - h)) / h;
  double dr = (eval_eta(cf, cf.a + h) - eval_eta(cf, cf.a)) / h;
  CHECK(dl == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(dr == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("equilibrium law relaxes theta toward the trace") {
  TorusGeometry g(16, 1.0);
  SurfaceField u = random_field(g, 1);
  SurfaceField v = random_field(g, 2);
  SurfaceField theta = random_field(g, 3);
  ExchangeLaw law = EquilibriumLaw{2.5};
  SurfaceField q = eval_q(law, u, v, theta);
  // compare against the dealiased pointwise formula
  SurfaceField expect = dealias_cubic(scale(sub(theta, u), -2.5));
  CHECK(sup_distance(q, expect) <= 1e-13);
}

TEST_CASE("non-equilibrium law matches its closed-form integral") {
  TorusGeometry g(32, 1.3);
  SurfaceField v = random_field(g, 5, 0.4);
  SurfaceField theta = SurfaceField::constant(g, 0.0);
  const double c1 = 1.7, c2 = 0.6, u0 = 0.8;
  ExchangeLaw law = NonEquilibriumLaw{c1, c2};
  double got = q_surface_integral(law, u0, v, theta);
  double expect = g.area() * c1 * u0 - (c1 * u0 + c2) * surface_integral(v);
  CHECK(std::abs(got - expect) <= 1e-12 * (1.0 + std::abs(expect)));
}

TEST_CASE("exchange output is dealiased") {
  TorusGeometry g(12, 1.0);
  SurfaceField u = random_field(g, 7);
  SurfaceField v = random_field(g, 8);
  SurfaceField theta = random_field(g, 9);
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  SurfaceField q = eval_q(law, u, v, theta);
  const auto& c = q.coeffs();
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1)
      if (!dealias_keeps(g, i1, i2))
        CHECK(std::abs(c[static_cast<std::size_t>(i2) * g.n + i1]) == 0.0);
}

TEST_CASE("cutoff law obeys the linear growth bound") {
  TorusGeometry g(8, 1.0);
  const double c1 = 2.0, c2 = 0.5, a = 1.25, w = 1.25;
  ExchangeLaw law = CutoffNonEquilibriumLaw{c1, c2, {a, w}};
  const double C = std::max(c1, c1 * (a + w) + c2);
  NoiseRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    double uval = 20.0 * rng.uniform_pm1();
    double vval = 20.0 * rng.uniform_pm1();
    SurfaceField u = SurfaceField::constant(g, uval);
    SurfaceField v = SurfaceField::constant(g, vval);
    SurfaceField theta = SurfaceField::constant(g, 0.0);
    SurfaceField q = eval_q(law, u, v, theta);
    CHECK(max_abs(q) <= C * (1.0 + std::abs(uval) + std::abs(vval)) + 1e-12);
  }
}

TEST_CASE("cutoff law equals the plain law for small arguments") {
  TorusGeometry g(16, 1.0);
  SurfaceField u = random_field(g, 13, 0.5);
  SurfaceField v = random_field(g, 14, 0.5);
  SurfaceField theta = SurfaceField::constant(g, 0.0);
  ExchangeLaw plain = NonEquilibriumLaw{1.2, 0.8};
  ExchangeLaw cut = CutoffNonEquilibriumLaw{1.2, 0.8, {1.0, 1.0}};
  // |u| <= 0.5 < a, so eta(u) = u and the laws coincide
  CHECK(sup_distance(eval_q(plain, u, v, theta), eval_q(cut, u, v, theta)) <= 1e-14);
}

TEST_CASE("law validation rejects bad rates") {
  CHECK_THROWS_AS(validate(ExchangeLaw(EquilibriumLaw{-1.0})), ConfigError);
  CHECK_THROWS_AS(validate(ExchangeLaw(NonEquilibriumLaw{0.0, 1.0})), ConfigError);
  CHECK_THROWS_AS(validate(ExchangeLaw(NonEquilibriumLaw{1.0, -2.0})), ConfigError);
  CHECK_THROWS_AS(validate(ExchangeLaw(CutoffNonEquilibriumLaw{1.0, 1.0, {1.0, 0.0}})),
                  ConfigError);
  CHECK_NOTHROW(validate(ExchangeLaw(EquilibriumLaw{0.0})));
  CHECK_NOTHROW(validate(ExchangeLaw(NonEquilibriumLaw{1.0, 1.0})));
}
