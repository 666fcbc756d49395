#include "raftsim/dynamics_reduced.hpp"

#include <cassert>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "raftsim/detail/surface_step.hpp"
#include "raftsim/errors.hpp"
#include "raftsim/spectral.hpp"

namespace raftsim {

namespace {

void check_state(const ReducedState& st) {
  if (!(st.bulk_volume > 0.0)) throw ConfigError("bulk volume must be positive");
  if (!std::isfinite(st.u) || !st.phi.finite() || !st.v.finite())
    throw IntegrationError("non-finite state at t = " + std::to_string(st.t));
}

}  // namespace

ReducedState step_reduced(const ReducedState& st, const ModelParams& p, const ExchangeLaw& law) {
  check_state(st);
  const TorusGeometry& g = st.phi.geometry();

  std::vector<cplx> s = detail::s_hat_of(st.phi, st.v);
  std::vector<cplx> th(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) th[i] = 2.0 / p.delta * s[i];
  SurfaceField theta = SurfaceField::from_coeffs(g, std::move(th));
  SurfaceField w = detail::dealiased_wprime(st.phi);
  // the single shared exchange evaluation of this step
  SurfaceField q = eval_q(law, st.u, st.v, theta);
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

  // The scalar equation uses the same zero-mode increment as v (with opposite
  // sign and the volume ratio), so the combined mass telescopes.
  const double u_out = st.u - p.dt * qh[0].real() * g.area() / st.bulk_volume;
  if (!std::isfinite(acc) || !std::isfinite(u_out))
    throw IntegrationError("non-finite state at t = " + std::to_string(st.t + p.dt));

  ReducedState out;
  out.t = st.t + p.dt;
  out.u = u_out;
  out.phi = SurfaceField::from_coeffs(g, std::move(phi_out));
  out.v = SurfaceField::from_coeffs(g, std::move(v_out));
  out.bulk_volume = st.bulk_volume;
  return out;
}

std::pair<SurfaceField, SurfaceField> potentials(const ReducedState& st, const ModelParams& p) {
  return detail::surface_potentials(st.phi, st.v, p.eps, p.delta);
}

EnergyReport energy(const ReducedState& st, const ModelParams& p, const ExchangeLaw& law) {
  check_state(st);
  const TorusGeometry& g = st.phi.geometry();

  EnergyReport rep;
  rep.F = detail::surface_free_energy(st.phi, st.v, p.eps, p.delta);
  rep.E_bulk = 0.5 * st.bulk_volume * st.u * st.u;
  rep.E_total = rep.F + rep.E_bulk;

  auto [mu, theta] = potentials(st, p);
  rep.gnorm_mu = surface_gradient_norm_sq(mu);
  rep.gnorm_theta = surface_gradient_norm_sq(theta);
  rep.gnorm_u = 0.0;

  SurfaceField q = eval_q(law, st.u, st.v, theta);
  const std::vector<double>& qv = q.values();
  const std::vector<double>& tv = theta.values();
  double ex = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i) ex += qv[i] * (tv[i] - st.u);
  rep.exch = ex * g.area() / static_cast<double>(qv.size());
  return rep;
}

MassReport masses(const ReducedState& st) {
  return {surface_integral(st.phi), st.bulk_volume * st.u + surface_integral(st.v)};
}

double u_rhs_closed_form(double U, double c1, double c2, double M, double bulk_volume,
                         double surface_area) {
  return -(c1 / bulk_volume) * U * U + (c1 * (M - surface_area) / bulk_volume - c2) * U + c2 * M;
}

double u_fixed_point(double c1, double c2, double M, double bulk_volume, double surface_area) {
  assert(c1 > 0.0 && c2 > 0.0 && bulk_volume > 0.0);
  const double a = c1 / bulk_volume;
  const double b = c1 * (M - surface_area) / bulk_volume - c2;
  const double c = c2 * M;
  const double disc = b * b + 4.0 * a * c;
  assert(disc > 0.0);
  // the nonnegative root of a U^2 - b U - c = 0, in the cancellation-free form
  const double root =
      (b > 0.0) ? (b + std::sqrt(disc)) / (2.0 * a) : 2.0 * c / (std::sqrt(disc) - b);
  return root / bulk_volume;
}

MeanFreeView decompose_mean_free(const ReducedState& st, const ModelParams& p) {
  check_state(st);
  auto [mu, theta] = potentials(st, p);
  MeanFreeView view;
  view.phi_mean = st.phi.mean();
  view.v_mean = st.v.mean();
  view.theta_mean = theta.mean();
  view.mu_mean = mu.mean();
  view.phi_mf = mean_free_project(st.phi);
  view.v_mf = mean_free_project(st.v);
  view.theta_mf = mean_free_project(theta);
  view.mu_mf = mean_free_project(mu);
  view.bulk_volume = st.bulk_volume;
  return view;
}

ReducedState reconstruct(const MeanFreeView& view, double u, double t) {
  ReducedState st;
  st.t = t;
  st.u = u;
  st.phi = view.phi_mf;
  st.v = view.v_mf;
  st.phi.mutable_coeffs()[0] += view.phi_mean;
  st.v.mutable_coeffs()[0] += view.v_mean;
  st.bulk_volume = view.bulk_volume;
  return st;
}

std::pair<MeanFreeView, double> step_reduced_meanfree(const MeanFreeView& view, double u,
                                                      const ModelParams& p, double c1,
                                                      double c2) {
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw ConfigError("non-equilibrium exchange rates must be positive");
  const TorusGeometry& g = view.phi_mf.geometry();
  const double volB = view.bulk_volume;
  const double area = g.area();
  const double M = volB * u + area * view.v_mean;

  // The nonlinear terms are evaluated on the reconstructed grids, exactly as
  // step_reduced sees them.
  ReducedState full = reconstruct(view, u);
  check_state(full);
  SurfaceField theta = view.theta_mf;
  theta.mutable_coeffs()[0] += view.theta_mean;
  SurfaceField w = detail::dealiased_wprime(full.phi);
  SurfaceField q = eval_q(ExchangeLaw{NonEquilibriumLaw{c1, c2}}, u, full.v, theta);
  const std::vector<cplx>& qh = q.coeffs();
  const std::vector<cplx>& ph = view.phi_mf.coeffs();
  const std::vector<cplx>& th = view.theta_mf.coeffs();
  const std::vector<cplx>& wh = w.coeffs();

  // Mean-free pair solve in (phi, theta); eliminating v turns the exchange
  // term into the explicit reaction -(delta (c1 u + c2)/4) theta
  // - ((c1 u + c2)/2) phi, which is what q supplies on the mean-free modes.
  const int n = g.n;
  const std::size_t n2 = g.size();
  const double S = p.stab_effective();
  std::vector<cplx> phi_out(n2), v_out(n2);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (idx == 0) continue;
      const double lam = g.lambda(i1, i2);
      const double a11 = 1.0 + p.dt * lam * (p.eps * lam + S);
      const double a12 = -0.5 * p.dt * lam;
      const double a22 = 0.5 * p.delta + 2.0 * p.dt * lam;
      const double det = a11 * a22 + 0.5 * p.dt * lam;
      const cplx r1 = (1.0 + p.dt * lam * S) * ph[idx] - p.dt * lam / p.eps * wh[idx];
      const cplx r2 = ph[idx] + 0.5 * p.delta * th[idx] + 2.0 * p.dt * qh[idx];
      const cplx phi_new = (a22 * r1 - a12 * r2) / det;
      const cplx theta_new = (a11 * r2 - r1) / det;
      phi_out[idx] = phi_new;
      v_out[idx] = 0.25 * p.delta * theta_new + 0.5 * phi_new;
    }

  // Zero modes: the phi mean is conserved, u follows the closed-form scalar
  // equation, and the v mean is rebuilt from the conserved combined mass.
  const double u_out = u + p.dt * u_rhs_closed_form(volB * u, c1, c2, M, volB, area) / volB;
  phi_out[0] = view.phi_mean;
  v_out[0] = (M - volB * u_out) / area;

  ReducedState next;
  next.u = u_out;
  next.phi = SurfaceField::from_coeffs(g, std::move(phi_out));
  next.v = SurfaceField::from_coeffs(g, std::move(v_out));
  next.bulk_volume = volB;
  return {decompose_mean_free(next, p), u_out};
}

std::pair<MeanFreeView, double> step_reduced_meanfree(const MeanFreeView& view, double u,
                                                      const ModelParams& p,
                                                      const ExchangeLaw& law) {
  const auto* ne = std::get_if<NonEquilibriumLaw>(&law);
  if (ne == nullptr)
    throw UnsupportedLawError(
        "the mean-free reformulation supports only the plain non-equilibrium law");
  return step_reduced_meanfree(view, u, p, ne->c1, ne->c2);
}

}  // namespace raftsim
