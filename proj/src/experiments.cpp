#include "raftsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>
#include <utility>

#include "raftsim/dynamics_full.hpp"
#include "raftsim/dynamics_ok.hpp"
#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/initial.hpp"
#include "raftsim/io.hpp"
#include "raftsim/spectral.hpp"
#include "raftsim/stationary.hpp"

namespace raftsim {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void make_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

// Runs work(0..count-1) on a bounded pool; exceptions are re-raised in
// member order so failures are deterministic.
void parallel_members(int count, const std::function<void(int)>& work) {
  const int width = pool_size(count);
  if (width <= 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (int t = 0; t < width; ++t) threads.emplace_back(body);
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

// Fill the fit fields of a series; when the data cannot support a fit and
// required is false, the series keeps kind "none" with the raw rows intact.
void apply_fit(SweepSeries& s, const std::vector<double>& x, const std::vector<double>& y,
               const std::string& observable, bool required) {
  s.fit_observable = observable;
  try {
    const LogLogFit f = fit_loglog(x, y);
    s.fit_kind = "loglog-lsq";
    s.slope = f.slope;
    s.slope_residual = f.residual_rms;
    s.fit_points = f.points;
  } catch (const ConfigError&) {
    if (required) throw;
    s.fit_kind = "none";
    s.slope = 0.0;
    s.slope_residual = 0.0;
    s.fit_points = 0;
  }
}

std::pair<double, double> field_range(const SurfaceField& f) {
  const std::vector<double>& v = f.values();
  double lo = v[0];
  double hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {lo, hi};
}

FullState make_full_initial(const RunConfig& c) {
  const SlabGeometry sg = c.geometry.slab();
  if (!c.initial.snapshot.empty()) return read_full_snapshot(c.initial.snapshot, sg);
  FullState st;
  st.t = 0.0;
  st.phi = ic_surface_noise(sg.base, c.initial.phi_mean, c.initial.noise_amp, c.initial.seed, 0);
  st.v = slaved_v(st.phi, c.total_mass - c.geometry.bulk_volume() * c.initial.u0);
  st.u = BulkField::constant(sg, c.initial.u0);
  return st;
}

ReducedState make_reduced_initial(const RunConfig& c) {
  const TorusGeometry g = c.geometry.torus();
  if (!c.initial.snapshot.empty()) return read_reduced_snapshot(c.initial.snapshot, g);
  ReducedState st;
  st.t = 0.0;
  st.u = c.initial.u0;
  st.bulk_volume = c.geometry.bulk_volume();
  st.phi = ic_surface_noise(g, c.initial.phi_mean, c.initial.noise_amp, c.initial.seed, 0);
  st.v = slaved_v(st.phi, c.total_mass - st.bulk_volume * st.u);
  return st;
}

OKState make_ok_initial(const RunConfig& c) {
  const TorusGeometry g = c.geometry.torus();
  if (!c.initial.snapshot.empty()) return read_ok_snapshot(c.initial.snapshot, g);
  OKState st;
  st.t = 0.0;
  st.u = c.initial.u0;
  st.bulk_volume = c.geometry.bulk_volume();
  st.total_mass = c.total_mass;
  st.phi =
      mean_free_project(ic_surface_noise(g, c.initial.phi_mean, c.initial.noise_amp,
                                         c.initial.seed, 0));
  return st;
}

// Shared run loop: cadence bookkeeping, blow-up handling, artifact layout.
template <class State>
RunArtifacts drive_run(const RunConfig& c, State st,
                       const std::vector<std::string>& observable_columns,
                       const std::function<std::vector<double>(const State&)>& observe,
                       const std::function<State(const State&)>& advance,
                       const std::function<bool(const State&)>& finite,
                       const std::function<void(const State&, const std::string&)>& dump,
                       const std::function<const SurfaceField&(const State&)>& phi_of) {
  const std::string& dir = c.output.dir;
  make_output_dir(dir);

  RunArtifacts art;
  art.steps = c.steps();
  art.csv_path = join(dir, "series.csv");
  art.final_state_path = join(dir, "final.state");
  art.pgm_path = join(dir, "phi_final.pgm");

  std::vector<std::string> cols = {"step", "t"};
  cols.insert(cols.end(), observable_columns.begin(), observable_columns.end());
  CsvWriter csv(art.csv_path, cols);

  auto emit_row = [&](long k) {
    std::vector<double> row = {static_cast<double>(k), st.t};
    const std::vector<double> obs = observe(st);
    row.insert(row.end(), obs.begin(), obs.end());
    csv.row(row);
  };
  auto emit_snapshot = [&](long k) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%08ld.snap", k);
    const std::string path = join(dir, name);
    dump(st, path);
    art.snapshot_paths.push_back(path);
    std::snprintf(name, sizeof(name), "phi_%08ld.pgm", k);
    emit_pgm(phi_of(st), join(dir, name));
  };
  auto dump_last_finite = [&](long k, const std::string& why) -> IntegrationError {
    const std::string path = join(dir, "last_finite.state");
    dump(st, path);
    csv.close();
    return IntegrationError(why + " (step " + std::to_string(k) +
                            "); last finite state written to " + path);
  };

  emit_row(0);
  if (c.output.snapshot_every > 0) emit_snapshot(0);

  for (long k = 1; k <= art.steps; ++k) {
    State next;
    try {
      next = advance(st);
    } catch (const IntegrationError& e) {
      throw dump_last_finite(k, e.what());
    }
    if (!finite(next)) throw dump_last_finite(k, "state lost finiteness");
    st = std::move(next);
    if (k % c.output.csv_every == 0 || k == art.steps) emit_row(k);
    if (c.output.snapshot_every > 0 &&
        (k % c.output.snapshot_every == 0 || k == art.steps))
      emit_snapshot(k);
  }

  csv.close();
  dump(st, art.final_state_path);
  emit_pgm(phi_of(st), art.pgm_path);
  return art;
}

RunArtifacts run_full_model(const RunConfig& c) {
  const ModelParams p = c.params;
  const ExchangeLaw law = c.law;
  return drive_run<FullState>(
      c, make_full_initial(c),
      {"m", "M_total", "E_total", "F", "E_bulk", "exch", "phi_min", "phi_max", "k_dominant"},
      [p, law](const FullState& s) {
        const MassReport mr = masses(s);
        const EnergyReport er = energy(s, p, law);
        const auto [lo, hi] = field_range(s.phi);
        return std::vector<double>{mr.m,     mr.M_total, er.E_total,
                                   er.F,     er.E_bulk,  er.exch,
                                   lo,       hi,         static_cast<double>(dominant_mode(s.phi))};
      },
      [p, law](const FullState& s) { return step_imex(s, p, law); },
      [](const FullState& s) { return s.phi.finite() && s.v.finite() && s.u.finite(); },
      [](const FullState& s, const std::string& path) { write_snapshot(path, s); },
      [](const FullState& s) -> const SurfaceField& { return s.phi; });
}

RunArtifacts run_reduced_model(const RunConfig& c) {
  const ModelParams p = c.params;
  const ExchangeLaw law = c.law;
  return drive_run<ReducedState>(
      c, make_reduced_initial(c),
      {"u", "m", "M_total", "E_total", "F", "exch", "phi_min", "phi_max", "k_dominant"},
      [p, law](const ReducedState& s) {
        const MassReport mr = masses(s);
        const EnergyReport er = energy(s, p, law);
        const auto [lo, hi] = field_range(s.phi);
        return std::vector<double>{s.u,   mr.m, mr.M_total, er.E_total, er.F,
                                   er.exch, lo,   hi,         static_cast<double>(dominant_mode(s.phi))};
      },
      [p, law](const ReducedState& s) { return step_reduced(s, p, law); },
      [](const ReducedState& s) {
        return std::isfinite(s.u) && s.phi.finite() && s.v.finite();
      },
      [](const ReducedState& s, const std::string& path) { write_snapshot(path, s); },
      [](const ReducedState& s) -> const SurfaceField& { return s.phi; });
}

RunArtifacts run_limit_model(const RunConfig& c) {
  const ModelParams p = c.params;
  const NonEquilibriumLaw law = std::get<NonEquilibriumLaw>(c.law);
  return drive_run<OKState>(
      c, make_ok_initial(c), {"u", "phi_l2", "phi_min", "phi_max", "k_dominant"},
      [](const OKState& s) {
        const auto [lo, hi] = field_range(s.phi);
        return std::vector<double>{s.u, std::sqrt(surface_l2_norm_sq(s.phi)), lo, hi,
                                   static_cast<double>(dominant_mode(s.phi))};
      },
      [p, law](const OKState& s) { return step_ok(s, p, law.c1, law.c2); },
      [](const OKState& s) { return std::isfinite(s.u) && s.phi.finite(); },
      [](const OKState& s, const std::string& path) { write_snapshot(path, s); },
      [](const OKState& s) -> const SurfaceField& { return s.phi; });
}

RunArtifacts run_stationary_solve(const RunConfig& c) {
  const std::string& dir = c.output.dir;
  make_output_dir(dir);
  const TorusGeometry g = c.geometry.torus();

  StationaryConfig sc;
  sc.m = c.initial.phi_mean * c.geometry.surface_area();
  sc.M = c.total_mass;
  sc.law = c.law;
  sc.p = c.params;
  sc.bulk_volume = c.geometry.bulk_volume();
  sc.alpha = c.stationary.alpha;
  sc.tol = c.stationary.tol;
  sc.max_iters = c.stationary.max_iters;

  SurfaceField init_phi;
  SurfaceField init_v;
  if (!c.initial.snapshot.empty()) {
    const ReducedState snap = read_reduced_snapshot(c.initial.snapshot, g);
    init_phi = mean_free_project(snap.phi);
    init_v = mean_free_project(snap.v);
  } else {
    init_phi = mean_free_project(
        ic_surface_noise(g, c.initial.phi_mean, c.initial.noise_amp, c.initial.seed, 0));
    init_v = scale(init_phi, 0.5);
  }

  const StationarySolution sol = fixed_point_iterate(sc, init_v, &init_phi);
  const ReducedState st = as_reduced_state(sol, sc);

  RunArtifacts art;
  art.steps = sol.iterations;
  art.csv_path = join(dir, "residuals.csv");
  art.final_state_path = join(dir, "final.state");
  art.pgm_path = join(dir, "phi_final.pgm");

  CsvWriter csv(art.csv_path, {"residual", "value"});
  csv.row_text({"mu", format_double(sol.residuals.mu)});
  csv.row_text({"v_equation", format_double(sol.residuals.v_equation)});
  csv.row_text({"constitutive", format_double(sol.residuals.constitutive)});
  csv.row_text({"q_mean", format_double(sol.residuals.q_mean)});
  csv.row_text({"mass", format_double(sol.residuals.mass)});
  csv.row_text({"max", format_double(sol.residuals.max())});
  csv.row_text({"iterations", std::to_string(sol.iterations)});
  csv.close();

  write_snapshot(art.final_state_path, st);
  emit_pgm(st.phi, art.pgm_path);
  return art;
}

// Exact spectral prolongation onto a finer grid of the same length; the
// coarse Nyquist rows split evenly between +-N/2 so real fields stay real.
SurfaceField prolong(const SurfaceField& f, const TorusGeometry& fine) {
  const TorusGeometry& g = f.geometry();
  if (fine.n == g.n && fine.length == g.length) return f;
  if (fine.length != g.length || fine.n < g.n)
    throw ConfigError("prolongation needs a finer grid of the same length");
  const std::vector<cplx>& in = f.coeffs();
  std::vector<cplx> out(fine.size(), cplx(0.0, 0.0));
  const int half = g.n / 2;
  auto spread = [half](int freq) {
    std::vector<std::pair<int, double>> parts;
    if (freq == half) {
      parts = {{half, 0.5}, {-half, 0.5}};
    } else {
      parts = {{freq, 1.0}};
    }
    return parts;
  };
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1) {
      const cplx cv = in[static_cast<std::size_t>(i2) * g.n + i1];
      if (cv == cplx(0.0, 0.0)) continue;
      for (const auto& [f1, w1] : spread(g.freq(i1)))
        for (const auto& [f2, w2] : spread(g.freq(i2))) {
          const int j1 = f1 >= 0 ? f1 : f1 + fine.n;
          const int j2 = f2 >= 0 ? f2 : f2 + fine.n;
          out[static_cast<std::size_t>(j2) * fine.n + j1] += w1 * w2 * cv;
        }
    }
  return SurfaceField::from_coeffs(fine, std::move(out));
}

// Final phi of one refinement member: band-limited smooth initial data so
// every resolution starts from the same function.
SurfaceField refinement_final_phi(const RunConfig& base, int n, double dt) {
  RunConfig c = base;
  c.geometry.N = n;
  c.params.dt = dt;
  const long steps = std::lround(c.params.t_end / dt);
  const TorusGeometry g = c.geometry.torus();
  const double amp = c.initial.noise_amp;

  if (c.model == ModelKind::Full) {
    const SlabGeometry sg = c.geometry.slab();
    FullState st;
    st.phi = ic_surface_smooth(g, c.initial.phi_mean, amp);
    st.v = slaved_v(st.phi, c.total_mass - c.geometry.bulk_volume() * c.initial.u0);
    st.u = ic_bulk_smooth(sg, c.initial.u0, amp);
    for (long k = 0; k < steps; ++k) st = step_imex(st, c.params, c.law);
    return st.phi;
  }
  if (c.model == ModelKind::Reduced) {
    ReducedState st;
    st.u = c.initial.u0;
    st.bulk_volume = c.geometry.bulk_volume();
    st.phi = ic_surface_smooth(g, c.initial.phi_mean, amp);
    st.v = slaved_v(st.phi, c.total_mass - st.bulk_volume * st.u);
    for (long k = 0; k < steps; ++k) st = step_reduced(st, c.params, c.law);
    return st.phi;
  }
  const NonEquilibriumLaw law = std::get<NonEquilibriumLaw>(c.law);
  OKState st;
  st.u = c.initial.u0;
  st.bulk_volume = c.geometry.bulk_volume();
  st.total_mass = c.total_mass;
  st.phi = mean_free_project(ic_surface_smooth(g, c.initial.phi_mean, amp));
  for (long k = 0; k < steps; ++k) st = step_ok(st, c.params, law.c1, law.c2);
  return st.phi;
}

}  // namespace

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("log-log fit needs matching arrays");
  const int n = static_cast<int>(x.size());
  if (n < 3) throw ConfigError("log-log fit needs at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ConfigError("log-log fit needs strictly positive finite data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 1e-12 * (1.0 + sx * sx))) throw ConfigError("log-log fit needs distinct abscissae");
  LogLogFit fit;
  fit.points = n;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  return fit;
}

int dominant_mode(const SurfaceField& f) {
  const TorusGeometry& g = f.geometry();
  const std::vector<cplx>& c = f.coeffs();
  std::vector<double> shells(g.n, 0.0);
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1) {
      if (i1 == 0 && i2 == 0) continue;
      const double f1 = g.freq(i1);
      const double f2 = g.freq(i2);
      const int s = static_cast<int>(std::lround(std::sqrt(f1 * f1 + f2 * f2)));
      if (s >= 0 && s < static_cast<int>(shells.size()))
        shells[s] += std::norm(c[static_cast<std::size_t>(i2) * g.n + i1]);
    }
  int best = 0;
  double mass = 0.0;
  for (int s = 0; s < static_cast<int>(shells.size()); ++s)
    if (shells[s] > mass) {
      mass = shells[s];
      best = s;
    }
  return best;
}

int pool_size(int members) {
  if (members <= 1) return members <= 0 ? 1 : 1;
  const unsigned hw = std::thread::hardware_concurrency();
  long cap = hw == 0 ? 1 : static_cast<long>(hw);
  if (const char* env = std::getenv("RAFTSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = std::min(cap, v);
  }
  return static_cast<int>(std::max(1L, std::min<long>(members, cap)));
}

void write_sweep(const SweepResult& result, const std::string& dir, const std::string& name) {
  make_output_dir(dir);
  const bool multi = result.series.size() > 1;
  for (const SweepSeries& s : result.series) {
    const std::string base = multi ? name + "_" + s.parameter : name;
    {
      std::vector<std::string> cols = {s.parameter};
      cols.insert(cols.end(), s.columns.begin(), s.columns.end());
      CsvWriter raw(join(dir, base + ".csv"), cols);
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        std::vector<double> row = {s.values[i]};
        row.insert(row.end(), s.rows[i].begin(), s.rows[i].end());
        raw.row(row);
      }
      raw.close();
    }
    {
      CsvWriter fit(join(dir, base + "_fit.csv"),
                    {"observable", "kind", "slope", "residual_rms", "points"});
      fit.row_text({s.fit_observable, s.fit_kind, format_double(s.slope),
                    format_double(s.slope_residual), std::to_string(s.fit_points)});
      fit.close();
    }
  }
}

RunArtifacts run(const RunConfig& config) {
  config.validate();
  switch (config.model) {
    case ModelKind::Full:
      return run_full_model(config);
    case ModelKind::Reduced:
      return run_reduced_model(config);
    case ModelKind::OK:
      return run_limit_model(config);
    case ModelKind::Stationary:
      return run_stationary_solve(config);
  }
  throw ConfigError("unhandled model kind");
}

SweepResult sweep_D(const RunConfig& config, const std::vector<double>& D_values) {
  config.validate();
  if (config.model != ModelKind::Full)
    throw ConfigError("sweep_D compares bulk gradients of the coupled model; set model=full");
  if (D_values.size() < 3) throw ConfigError("sweep_D needs at least 3 diffusivity values");
  for (double d : D_values)
    if (!(d > 0.0)) throw ConfigError("diffusivities must be positive");
  if (!config.initial.snapshot.empty())
    throw ConfigError("sweep_D needs seeded initial data shared by the coupled and reduced runs");
  const long steps = config.steps();
  if (steps < 1) throw ConfigError("sweep_D needs t_end >= dt");

  struct Member {
    double grad_integral = 0.0;
    double trace_mean = 0.0;
  };
  std::vector<Member> members(D_values.size());
  double u_reduced_final = 0.0;

  const int tasks = static_cast<int>(D_values.size()) + 1;
  parallel_members(tasks, [&](int idx) {
    if (idx == static_cast<int>(D_values.size())) {
      ReducedState st = make_reduced_initial(config);
      for (long k = 0; k < steps; ++k) st = step_reduced(st, config.params, config.law);
      u_reduced_final = st.u;
      return;
    }
    RunConfig cfg = config;
    cfg.params.D = D_values[idx];
    FullState st = make_full_initial(cfg);
    double prev = bulk_gradient_norm_sq(st.u);
    double acc = 0.0;
    for (long k = 0; k < steps; ++k) {
      st = step_imex(st, cfg.params, cfg.law);
      const double cur = bulk_gradient_norm_sq(st.u);
      acc += 0.5 * (prev + cur) * cfg.params.dt;
      prev = cur;
    }
    members[idx].grad_integral = acc;
    members[idx].trace_mean = surface_mean(bulk_trace(st.u));
  });

  SweepSeries s;
  s.parameter = "D";
  s.values = D_values;
  s.columns = {"grad_u_integral", "e_red", "u_trace_mean"};
  std::vector<double> grads;
  for (std::size_t i = 0; i < D_values.size(); ++i) {
    const double e_red = std::abs(members[i].trace_mean - u_reduced_final);
    s.rows.push_back({members[i].grad_integral, e_red, members[i].trace_mean});
    grads.push_back(members[i].grad_integral);
  }
  apply_fit(s, D_values, grads, "grad_u_integral", true);

  SweepResult result;
  result.series.push_back(std::move(s));
  return result;
}

SweepResult sweep_delta(const RunConfig& config, const std::vector<double>& deltas) {
  config.validate();
  const auto* law = std::get_if<NonEquilibriumLaw>(&config.law);
  if (!law)
    throw ConfigError("sweep_delta requires the plain non-equilibrium law");
  if (deltas.empty()) throw ConfigError("sweep_delta needs at least one delta");
  for (double d : deltas)
    if (!(d >= 1e-8)) throw ConfigError("every delta must be at least 1e-8");

  SweepConfig sc;
  sc.n = config.geometry.N;
  sc.length = config.geometry.L;
  sc.eps = config.params.eps;
  sc.dt = config.params.dt;
  sc.t_end = config.params.t_end;
  sc.c1 = law->c1;
  sc.c2 = law->c2;
  sc.noise_amp = config.initial.noise_amp;
  sc.seed = config.initial.seed;
  sc.u0 = config.initial.u0;
  sc.bulk_volume = config.geometry.bulk_volume();
  sc.total_mass = config.total_mass;

  const std::vector<DeltaSweepRow> rows = delta_sweep(sc, deltas);

  SweepSeries s;
  s.parameter = "delta";
  s.values = deltas;
  s.columns = {"error_l2", "u_final"};
  std::vector<double> errs;
  for (const DeltaSweepRow& r : rows) {
    s.rows.push_back({r.error_l2, r.u_final});
    errs.push_back(r.error_l2);
  }
  apply_fit(s, deltas, errs, "error_l2", false);

  SweepResult result;
  result.series.push_back(std::move(s));
  return result;
}

SweepResult refinement_study(const RunConfig& config, const std::vector<int>& N_values,
                             const std::vector<double>& dt_values) {
  config.validate();
  if (config.model == ModelKind::Stationary)
    throw ConfigError("refinement_study needs a time-dependent model");
  if (config.model == ModelKind::OK && !std::holds_alternative<NonEquilibriumLaw>(config.law))
    throw ConfigError("the limit model requires the plain non-equilibrium law");
  if (N_values.size() < 3 || dt_values.size() < 3)
    throw ConfigError("insufficient resolutions: need at least 3 grid sizes and 3 step sizes");
  for (std::size_t i = 0; i < N_values.size(); ++i) {
    if (N_values[i] < 8 || N_values[i] % 2 != 0)
      throw ConfigError("grid sizes must be even and at least 8");
    if (i > 0 && N_values[i] <= N_values[i - 1])
      throw ConfigError("grid sizes must be strictly increasing");
  }
  const double T = config.params.t_end;
  for (std::size_t i = 0; i < dt_values.size(); ++i) {
    if (!(dt_values[i] > 0.0)) throw ConfigError("step sizes must be positive");
    if (i > 0 && dt_values[i] >= dt_values[i - 1])
      throw ConfigError("step sizes must be strictly decreasing");
    const long k = std::lround(T / dt_values[i]);
    if (k < 1 || std::abs(k * dt_values[i] - T) > 1e-9 * std::max(T, 1.0))
      throw ConfigError("every step size must divide t_end");
  }

  SweepResult result;

  // Temporal self-convergence at the configured grid.
  {
    const int members = static_cast<int>(dt_values.size());
    std::vector<SurfaceField> finals(members);
    parallel_members(members, [&](int i) {
      finals[i] = refinement_final_phi(config, config.geometry.N, dt_values[i]);
    });

    SweepSeries s;
    s.parameter = "dt";
    s.values = dt_values;
    s.columns = {"err_vs_finest"};
    const SurfaceField& finest = finals[members - 1];
    for (int i = 0; i < members; ++i)
      s.rows.push_back({i == members - 1 ? 0.0 : l2_distance(finals[i], finest)});

    std::vector<double> gaps, diffs;
    for (int i = 0; i + 1 < members; ++i) {
      gaps.push_back(dt_values[i] - dt_values[i + 1]);
      diffs.push_back(l2_distance(finals[i], finals[i + 1]));
    }
    if (gaps.size() >= 3) {
      apply_fit(s, gaps, diffs, "consecutive_diff", false);
    } else {
      s.fit_observable = "consecutive_diff";
      if (diffs[0] > 0.0 && diffs[1] > 0.0 && gaps[0] != gaps[1]) {
        s.fit_kind = "order-ratio";
        s.slope = std::log(diffs[0] / diffs[1]) / std::log(gaps[0] / gaps[1]);
        s.slope_residual = 0.0;
        s.fit_points = 2;
      }
    }
    result.series.push_back(std::move(s));
  }

  // Spatial self-convergence at the configured step size.
  {
    const int members = static_cast<int>(N_values.size());
    std::vector<SurfaceField> finals(members);
    parallel_members(members, [&](int i) {
      finals[i] = refinement_final_phi(config, N_values[i], config.params.dt);
    });

    SweepSeries s;
    s.parameter = "N";
    s.values.assign(N_values.begin(), N_values.end());
    s.columns = {"err_vs_finest"};
    const TorusGeometry fine(N_values[members - 1], config.geometry.L);
    const SurfaceField& finest = finals[members - 1];
    std::vector<double> ns, errs;
    for (int i = 0; i < members; ++i) {
      const double err =
          i == members - 1 ? 0.0 : l2_distance(prolong(finals[i], fine), finest);
      s.rows.push_back({err});
      if (i < members - 1) {
        ns.push_back(N_values[i]);
        errs.push_back(err);
      }
    }
    apply_fit(s, ns, errs, "err_vs_finest", false);
    if (s.fit_kind == "none" && errs.size() == 2 && errs[0] > 0.0 && errs[1] > 0.0) {
      s.fit_kind = "order-ratio";
      s.slope = std::log(errs[0] / errs[1]) / std::log(ns[0] / ns[1]);
      s.slope_residual = 0.0;
      s.fit_points = 2;
    }
    result.series.push_back(std::move(s));
  }

  return result;
}

}  // namespace raftsim
