#include "raftsim/dynamics_full.hpp"

#include <cmath>
#include <string>

#include "raftsim/detail/surface_step.hpp"
#include "raftsim/spectral.hpp"

namespace raftsim {

namespace detail {

void surface_pair_step(const TorusGeometry& g, double eps, double delta, double dt, double stab,
                       const std::vector<cplx>& phi_hat, const std::vector<cplx>& s_hat,
                       const std::vector<cplx>& wprime_hat, const std::vector<cplx>& q_hat,
                       std::vector<cplx>& phi_out, std::vector<cplx>& s_out) {
  const int n = g.n;
  const std::size_t n2 = g.size();
  phi_out.resize(n2);
  s_out.resize(n2);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        // lam = 0: phi is conserved exactly, s sees only the exchange term
        phi_out[0] = phi_hat[0];
        s_out[0] = s_hat[0] + 2.0 * dt * q_hat[0];
        continue;
      }
      const double lam = g.lambda(i1, i2);
      const double a11 = 1.0 + dt * lam * (eps * lam + stab);
      const double a12 = -dt * lam / delta;
      const double a22 = 1.0 + 4.0 * dt * lam / delta;
      const double det = a11 * a22 + dt * lam / delta;
      const cplx r1 = (1.0 + dt * lam * stab) * phi_hat[idx] - dt * lam / eps * wprime_hat[idx];
      const cplx r2 = s_hat[idx] + phi_hat[idx] + 2.0 * dt * q_hat[idx];
      phi_out[idx] = (a22 * r1 - a12 * r2) / det;
      s_out[idx] = (a11 * r2 - r1) / det;
    }
}

std::vector<cplx> s_hat_of(const SurfaceField& phi, const SurfaceField& v) {
  const std::vector<cplx>& ph = phi.coeffs();
  const std::vector<cplx>& vh = v.coeffs();
  std::vector<cplx> s(ph.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 2.0 * vh[i] - ph[i];
  s[0] -= 1.0;
  return s;
}

SurfaceField dealiased_wprime(const SurfaceField& phi) {
  const std::vector<double>& pv = phi.values();
  std::vector<double> w(pv.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = double_well_prime(pv[i]);
  return dealias_cubic(SurfaceField::from_values(phi.geometry(), std::move(w)));
}

double surface_free_energy(const SurfaceField& phi, const SurfaceField& v, double eps,
                           double delta) {
  const std::vector<double>& pv = phi.values();
  const std::vector<double>& vv = v.values();
  double wsum = 0.0, ssum = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double s = 2.0 * vv[i] - 1.0 - pv[i];
    wsum += double_well(pv[i]);
    ssum += s * s;
  }
  const double quad = phi.geometry().area() / static_cast<double>(pv.size());
  return 0.5 * eps * surface_gradient_norm_sq(phi) + wsum * quad / eps +
         ssum * quad / (2.0 * delta);
}

std::pair<SurfaceField, SurfaceField> surface_potentials(const SurfaceField& phi,
                                                         const SurfaceField& v, double eps,
                                                         double delta) {
  const TorusGeometry& g = phi.geometry();
  std::vector<cplx> s = s_hat_of(phi, v);
  SurfaceField w = dealiased_wprime(phi);
  const std::vector<cplx>& wh = w.coeffs();
  const std::vector<cplx>& ph = phi.coeffs();
  const int n = g.n;
  std::vector<cplx> mu(s.size()), th(s.size());
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      const double lam = g.lambda(i1, i2);
      mu[idx] = eps * lam * ph[idx] + wh[idx] / eps - s[idx] / delta;
      th[idx] = 2.0 / delta * s[idx];
    }
  return {SurfaceField::from_coeffs(g, std::move(mu)),
          SurfaceField::from_coeffs(g, std::move(th))};
}

}  // namespace detail

namespace {

using detail::dealiased_wprime;
using detail::s_hat_of;

void check_state(const FullState& st) {
  if (!(st.u.geometry().base == st.phi.geometry()) || !(st.phi.geometry() == st.v.geometry()))
    throw ConfigError("state components live on different grids");
}

}  // namespace

std::pair<SurfaceField, SurfaceField> potentials(const FullState& st, const ModelParams& p) {
  return detail::surface_potentials(st.phi, st.v, p.eps, p.delta);
}

EnergyReport energy(const FullState& st, const ModelParams& p, const ExchangeLaw& law) {
  check_state(st);
  const TorusGeometry& g = st.phi.geometry();
  const double quad = g.area() / static_cast<double>(g.size());

  EnergyReport rep;
  rep.F = detail::surface_free_energy(st.phi, st.v, p.eps, p.delta);
  rep.E_bulk = 0.5 * bulk_l2_norm_sq(st.u);
  rep.E_total = rep.F + rep.E_bulk;

  auto [mu, theta] = potentials(st, p);
  rep.gnorm_mu = surface_gradient_norm_sq(mu);
  rep.gnorm_theta = surface_gradient_norm_sq(theta);
  rep.gnorm_u = p.D * bulk_gradient_norm_sq(st.u);

  SurfaceField tr = bulk_trace(st.u);
  SurfaceField q = eval_q(law, tr, st.v, theta);
  const std::vector<double>& qv = q.values();
  const std::vector<double>& tv = theta.values();
  const std::vector<double>& uv = tr.values();
  double ex = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i) ex += qv[i] * (tv[i] - uv[i]);
  rep.exch = ex * quad;
  return rep;
}

MassReport masses(const FullState& st) {
  return {surface_integral(st.phi), bulk_integral(st.u) + surface_integral(st.v)};
}

FullState step_imex(const FullState& st, const ModelParams& p, const ExchangeLaw& law) {
  check_state(st);
  const TorusGeometry& g = st.phi.geometry();
  const SlabGeometry& sg = st.u.geometry();

  std::vector<cplx> s = s_hat_of(st.phi, st.v);
  std::vector<cplx> th(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) th[i] = 2.0 / p.delta * s[i];
  SurfaceField theta = SurfaceField::from_coeffs(g, std::move(th));
  SurfaceField w = dealiased_wprime(st.phi);
  SurfaceField tr = bulk_trace(st.u);
  // the single shared exchange evaluation of this step
  SurfaceField q = eval_q(law, tr, st.v, theta);
  const std::vector<cplx>& qh = q.coeffs();

  std::vector<cplx> phi_out, s_out;
  detail::surface_pair_step(g, p.eps, p.delta, p.dt, p.stab_effective(), st.phi.coeffs(), s,
                            w.coeffs(), qh, phi_out, s_out);

  const std::size_t n2 = g.size();
  std::vector<cplx> v_out(n2);
  double acc = 0.0;
  for (std::size_t i = 0; i < n2; ++i) {
    v_out[i] = 0.5 * (s_out[i] + phi_out[i]);
    acc += std::norm(phi_out[i]) + std::norm(s_out[i]);
  }
  v_out[0] += 0.5;

  const int n = g.n;
  std::vector<cplx> u_out(st.u.coeffs());
  for (int m = 0; m < sg.mz; ++m) {
    const double beta = (m == 0 ? 1.0 : 2.0) / sg.height;
    cplx* slab = u_out.data() + static_cast<std::size_t>(m) * n2;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
        slab[idx] = (slab[idx] - p.dt * beta * qh[idx]) / (1.0 + p.dt * p.D * sg.lambda(i1, i2, m));
        acc += std::norm(slab[idx]);
      }
  }
  if (!std::isfinite(acc))
    throw IntegrationError("non-finite state at t = " + std::to_string(st.t + p.dt));

  FullState out;
  out.t = st.t + p.dt;
  out.phi = SurfaceField::from_coeffs(g, std::move(phi_out));
  out.v = SurfaceField::from_coeffs(g, std::move(v_out));
  out.u = BulkField::from_coeffs(sg, std::move(u_out));
  return out;
}

namespace {

struct Packed {
  std::vector<cplx> phi, v, u;
};

Packed rhs_full(const TorusGeometry& g, const SlabGeometry& sg, const ModelParams& p,
                const ExchangeLaw& law, const Packed& y) {
  SurfaceField phi = SurfaceField::from_coeffs(g, y.phi);
  SurfaceField v = SurfaceField::from_coeffs(g, y.v);
  BulkField u = BulkField::from_coeffs(sg, y.u);
  std::vector<cplx> s = s_hat_of(phi, v);
  std::vector<cplx> th(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) th[i] = 2.0 / p.delta * s[i];
  SurfaceField theta = SurfaceField::from_coeffs(g, th);
  SurfaceField w = dealiased_wprime(phi);
  SurfaceField q = eval_q(law, bulk_trace(u), v, theta);
  const std::vector<cplx>& qh = q.coeffs();
  const std::vector<cplx>& wh = w.coeffs();

  const int n = g.n;
  const std::size_t n2 = g.size();
  Packed d;
  d.phi.resize(n2);
  d.v.resize(n2);
  d.u.resize(y.u.size());
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      const double lam = g.lambda(i1, i2);
      const cplx mu = p.eps * lam * y.phi[idx] + wh[idx] / p.eps - s[idx] / p.delta;
      d.phi[idx] = -lam * mu;
      d.v[idx] = -lam * th[idx] + qh[idx];
    }
  for (int m = 0; m < sg.mz; ++m) {
    const double beta = (m == 0 ? 1.0 : 2.0) / sg.height;
    const cplx* ys = y.u.data() + static_cast<std::size_t>(m) * n2;
    cplx* ds = d.u.data() + static_cast<std::size_t>(m) * n2;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
        ds[idx] = -p.D * sg.lambda(i1, i2, m) * ys[idx] - beta * qh[idx];
      }
  }
  return d;
}

void axpy(Packed& y, double a, const Packed& x) {
  for (std::size_t i = 0; i < y.phi.size(); ++i) y.phi[i] += a * x.phi[i];
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
  for (std::size_t i = 0; i < y.u.size(); ++i) y.u[i] += a * x.u[i];
}

}  // namespace

FullState reference_rk4(const FullState& st, const ModelParams& p, const ExchangeLaw& law,
                        double dt_ref, long steps) {
  check_state(st);
  const TorusGeometry& g = st.phi.geometry();
  const SlabGeometry& sg = st.u.geometry();
  if (g.n > 16) throw ConfigError("reference integrator is restricted to N <= 16");
  if (!(dt_ref > 0.0) || steps < 0) throw ConfigError("reference integrator needs dt > 0");

  Packed y{st.phi.coeffs(), st.v.coeffs(), st.u.coeffs()};
  for (long step = 0; step < steps; ++step) {
    Packed k1 = rhs_full(g, sg, p, law, y);
    Packed y2 = y;
    axpy(y2, 0.5 * dt_ref, k1);
    Packed k2 = rhs_full(g, sg, p, law, y2);
    Packed y3 = y;
    axpy(y3, 0.5 * dt_ref, k2);
    Packed k3 = rhs_full(g, sg, p, law, y3);
    Packed y4 = y;
    axpy(y4, dt_ref, k3);
    Packed k4 = rhs_full(g, sg, p, law, y4);
    axpy(y, dt_ref / 6.0, k1);
    axpy(y, dt_ref / 3.0, k2);
    axpy(y, dt_ref / 3.0, k3);
    axpy(y, dt_ref / 6.0, k4);
  }
  double acc = 0.0;
  for (const cplx& c : y.phi) acc += std::norm(c);
  for (const cplx& c : y.u) acc += std::norm(c);
  if (!std::isfinite(acc)) throw IntegrationError("reference integration blew up");

  FullState out;
  out.t = st.t + dt_ref * static_cast<double>(steps);
  out.phi = SurfaceField::from_coeffs(g, std::move(y.phi));
  out.v = SurfaceField::from_coeffs(g, std::move(y.v));
  out.u = BulkField::from_coeffs(sg, std::move(y.u));
  return out;
}

DissipationReport dissipation_check(const FullState& prev, const FullState& next,
                                    const ModelParams& p, const ExchangeLaw& law) {
  EnergyReport ep = energy(prev, p, law);
  EnergyReport en = energy(next, p, law);
  double dt = next.t - prev.t;
  if (!(dt > 0.0)) dt = p.dt;

  FullState mid;
  mid.t = 0.5 * (prev.t + next.t);
  mid.phi = scale(add(prev.phi, next.phi), 0.5);
  mid.v = scale(add(prev.v, next.v), 0.5);
  std::vector<cplx> uc(prev.u.coeffs());
  const std::vector<cplx>& un = next.u.coeffs();
  for (std::size_t i = 0; i < uc.size(); ++i) uc[i] = 0.5 * (uc[i] + un[i]);
  mid.u = BulkField::from_coeffs(prev.u.geometry(), std::move(uc));

  EnergyReport em = energy(mid, p, law);
  DissipationReport rep;
  rep.exch = em.exch;
  rep.scale = 1.0 + std::abs(en.E_total);
  rep.residual =
      (en.E_total - ep.E_total) / dt + em.gnorm_mu + em.gnorm_theta + em.gnorm_u - em.exch;
  return rep;
}

}  // namespace raftsim
