#include "raftsim/dynamics_ok.hpp"

#include <cmath>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "raftsim/detail/surface_step.hpp"
#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/errors.hpp"
#include "raftsim/initial.hpp"
#include "raftsim/spectral.hpp"

namespace raftsim {

SurfaceField sigma_solve(const SurfaceField& phi, double u, double c1, double c2) {
  if (std::abs(surface_mean(phi)) > 1e-10)
    throw SingularSystemError("sigma solve needs a mean-free order parameter");
  const TorusGeometry& g = phi.geometry();
  const std::vector<cplx>& ph = phi.coeffs();
  const double c = 0.5 * (c1 * u + c2);
  const int n = g.n;
  std::vector<cplx> out(ph.size());
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (idx == 0) continue;
      out[idx] = -c / g.lambda(i1, i2) * ph[idx];
    }
  return SurfaceField::from_coeffs(g, std::move(out));
}

OKState step_ok(const OKState& st, const ModelParams& p, double c1, double c2) {
  if (!(st.bulk_volume > 0.0)) throw ConfigError("bulk volume must be positive");
  if (!std::isfinite(st.u) || !st.phi.finite())
    throw IntegrationError("non-finite state at t = " + std::to_string(st.t));
  const TorusGeometry& g = st.phi.geometry();

  SurfaceField w = detail::dealiased_wprime(st.phi);
  SurfaceField sigma = sigma_solve(st.phi, st.u, c1, c2);
  const std::vector<cplx>& ph = st.phi.coeffs();
  const std::vector<cplx>& wh = w.coeffs();
  const std::vector<cplx>& sh = sigma.coeffs();

  const int n = g.n;
  const double S = p.stab_effective();
  const double mob = 0.8 * p.dt;  // 4/5 mobility times the step size
  std::vector<cplx> out(ph.size());
  double acc = 0.0;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (idx == 0) {
        out[0] = ph[0];
        continue;
      }
      const double lam = g.lambda(i1, i2);
      const cplx num =
          (1.0 + mob * lam * S) * ph[idx] - mob * lam * (wh[idx] / p.eps - 0.5 * sh[idx]);
      out[idx] = num / (1.0 + mob * lam * (p.eps * lam + S));
      acc += std::norm(out[idx]);
    }

  const double u_out =
      st.u + p.dt *
                 u_rhs_closed_form(st.bulk_volume * st.u, c1, c2, st.total_mass, st.bulk_volume,
                                   g.area()) /
                 st.bulk_volume;
  if (!std::isfinite(acc) || !std::isfinite(u_out))
    throw IntegrationError("non-finite state at t = " + std::to_string(st.t + p.dt));

  OKState next;
  next.t = st.t + p.dt;
  next.phi = SurfaceField::from_coeffs(g, std::move(out));
  next.u = u_out;
  next.bulk_volume = st.bulk_volume;
  next.total_mass = st.total_mass;
  return next;
}

double ok_step_multiplier(double lambda, double u, const ModelParams& p, double c1, double c2) {
  const double S = p.stab_effective();
  const double mob = 0.8 * p.dt;
  const double num = 1.0 + mob * lambda * S + mob * lambda * 4.0 / p.eps -
                     0.5 * mob * 0.5 * (c1 * u + c2);
  return num / (1.0 + mob * lambda * (p.eps * lambda + S));
}

double ok_growth_rate(double lambda, double u, const ModelParams& p, double c1, double c2) {
  return -0.8 * lambda * (p.eps * lambda - 4.0 / p.eps) - 0.2 * (c1 * u + c2);
}

namespace {

struct SharedStart {
  SurfaceField phi;  // mean-free
  double v_mean = 0.0;
};

SharedStart shared_start(const SweepConfig& cfg, const TorusGeometry& g) {
  SharedStart s;
  s.phi = mean_free_project(ic_surface_noise(g, 0.0, cfg.noise_amp, cfg.seed, 0));
  s.v_mean = (cfg.total_mass - cfg.bulk_volume * cfg.u0) / g.area();
  return s;
}

ModelParams sweep_params(const SweepConfig& cfg, double delta) {
  ModelParams p;
  p.eps = cfg.eps;
  p.delta = delta;
  p.dt = cfg.dt;
  p.t_end = cfg.t_end;
  p.validate();
  return p;
}

long sweep_steps(const SweepConfig& cfg) {
  if (!(cfg.t_end >= 0.0) || !(cfg.dt > 0.0)) throw ConfigError("sweep needs t_end >= 0, dt > 0");
  return std::llround(cfg.t_end / cfg.dt);
}

}  // namespace

std::pair<SurfaceField, double> run_reduced_final(const SweepConfig& cfg, double delta) {
  TorusGeometry g{cfg.n, cfg.length};
  const ModelParams p = sweep_params(cfg, delta);
  const SharedStart start = shared_start(cfg, g);

  // v slaved to phi/2 plus its mean: the relaxation variable starts in
  // equilibrium (2v - 1 - phi has no mean-free part).
  std::vector<cplx> vh(start.phi.coeffs());
  for (cplx& c : vh) c *= 0.5;
  vh[0] = start.v_mean;

  ReducedState st;
  st.u = cfg.u0;
  st.phi = start.phi;
  st.v = SurfaceField::from_coeffs(g, std::move(vh));
  st.bulk_volume = cfg.bulk_volume;

  const ExchangeLaw law = NonEquilibriumLaw{cfg.c1, cfg.c2};
  const long steps = sweep_steps(cfg);
  for (long k = 0; k < steps; ++k) st = step_reduced(st, p, law);
  return {mean_free_project(st.phi), st.u};
}

std::pair<SurfaceField, double> run_ok_final(const SweepConfig& cfg) {
  TorusGeometry g{cfg.n, cfg.length};
  const ModelParams p = sweep_params(cfg, 0.1);  // delta does not enter the limit model
  OKState st;
  st.phi = shared_start(cfg, g).phi;
  st.u = cfg.u0;
  st.bulk_volume = cfg.bulk_volume;
  st.total_mass = cfg.total_mass;
  const long steps = sweep_steps(cfg);
  for (long k = 0; k < steps; ++k) st = step_ok(st, p, cfg.c1, cfg.c2);
  return {st.phi, st.u};
}

std::vector<DeltaSweepRow> delta_sweep(const SweepConfig& cfg, const std::vector<double>& deltas) {
  auto ok_future = std::async(std::launch::async, [&cfg] { return run_ok_final(cfg); });
  std::vector<std::future<std::pair<SurfaceField, double>>> reduced;
  reduced.reserve(deltas.size());
  for (double d : deltas)
    reduced.push_back(std::async(std::launch::async, [&cfg, d] { return run_reduced_final(cfg, d); }));

  const std::pair<SurfaceField, double> ok = ok_future.get();
  std::vector<DeltaSweepRow> rows;
  rows.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const std::pair<SurfaceField, double> red = reduced[i].get();
    rows.push_back({deltas[i], l2_distance(red.first, ok.first), red.second});
  }
  return rows;
}

}  // namespace raftsim
