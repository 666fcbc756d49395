#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raftsim/config.hpp"
#include "raftsim/errors.hpp"
#include "raftsim/experiments.hpp"

namespace {

using namespace raftsim;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory (overrides the configuration)");
  o.seed_opt = cmd->add_option("--seed", o.seed, "RNG seed (overrides the configuration)");
}

RunConfig load_base(const CommonOpts& o) {
  RunConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  if (!o.out_dir.empty()) c.output.dir = o.out_dir;
  if (o.seed_opt && o.seed_opt->count() > 0) c.initial.seed = o.seed;
  return c;
}

void print_fit(const SweepSeries& s) {
  if (s.fit_kind == "none") {
    std::printf("  %s sweep: no fitted slope (%zu rows)\n", s.parameter.c_str(),
                s.values.size());
    return;
  }
  std::printf("  %s sweep: slope of %s = %.6f (%s, %d points, residual %.3g)\n",
              s.parameter.c_str(), s.fit_observable.c_str(), s.slope, s.fit_kind.c_str(),
              s.fit_points, s.slope_residual);
}

int run_main(const CommonOpts& common) {
  const RunConfig c = load_base(common);
  const RunArtifacts art = run(c);
  std::printf("completed %ld steps of the %s model\n", art.steps,
              to_string(c.model).c_str());
  std::printf("  series:      %s\n", art.csv_path.c_str());
  std::printf("  final state: %s\n", art.final_state_path.c_str());
  std::printf("  final image: %s\n", art.pgm_path.c_str());
  if (!art.snapshot_paths.empty())
    std::printf("  snapshots:   %zu files in %s\n", art.snapshot_paths.size(),
                c.output.dir.c_str());
  return 0;
}

int sweep_d_main(const CommonOpts& common, const std::vector<double>& Ds, double t_end,
                 bool t_end_set) {
  RunConfig c = load_base(common);
  if (t_end_set) c.params.t_end = t_end;
  const SweepResult res = sweep_D(c, Ds);
  write_sweep(res, c.output.dir, "sweep_D");
  std::printf("bulk diffusivity sweep over %zu values written to %s\n", Ds.size(),
              c.output.dir.c_str());
  for (const SweepSeries& s : res.series) print_fit(s);
  return 0;
}

int sweep_delta_main(const CommonOpts& common, const std::vector<double>& deltas, double t_end,
                     bool t_end_set) {
  RunConfig c = load_base(common);
  if (t_end_set) c.params.t_end = t_end;
  const SweepResult res = sweep_delta(c, deltas);
  write_sweep(res, c.output.dir, "sweep_delta");
  std::printf("exchange-scale sweep over %zu values written to %s\n", deltas.size(),
              c.output.dir.c_str());
  for (const SweepSeries& s : res.series) print_fit(s);
  return 0;
}

int refine_main(const CommonOpts& common, const std::vector<int>& Ns,
                const std::vector<double>& dts, double t_end, bool t_end_set) {
  RunConfig c;
  if (!common.config_path.empty()) {
    c = load_base(common);
  } else {
    // Without a configuration file, use a smooth well-resolved regime so the
    // default study finishes quickly and the fitted orders are meaningful.
    c = load_base(common);
    c.model = ModelKind::Reduced;
    c.params.eps = 0.3;
    c.params.dt = 1e-4;
    c.params.t_end = 8e-4;
  }
  if (t_end_set) c.params.t_end = t_end;
  const SweepResult res = refinement_study(c, Ns, dts);
  write_sweep(res, c.output.dir, "refine");
  std::printf("refinement study written to %s\n", c.output.dir.c_str());
  for (const SweepSeries& s : res.series) print_fit(s);
  return 0;
}

struct StationaryOpts {
  double m = -0.4;
  double M = 1.0;
  double eps = 0.04;
  double delta = 0.1;
  double tol = 1e-9;
  double alpha = 0.5;
  int max_iters = 2000;
  std::string law = "noneq";
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double cutoff_a = 1.0;
  double cutoff_w = 1.0;
};

int stationary_main(const CommonOpts& common, const StationaryOpts& o, const CLI::App* cmd) {
  RunConfig c = load_base(common);
  c.model = ModelKind::Stationary;
  auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--m")) c.initial.phi_mean = o.m;
  if (given("--M")) c.total_mass = o.M;
  if (given("--eps")) c.params.eps = o.eps;
  if (given("--delta")) c.params.delta = o.delta;
  if (given("--tol")) c.stationary.tol = o.tol;
  if (given("--alpha")) c.stationary.alpha = o.alpha;
  if (given("--max-iters")) c.stationary.max_iters = o.max_iters;
  if (given("--law")) {
    if (o.law == "noneq") {
      c.law = NonEquilibriumLaw{o.c1, o.c2};
    } else if (o.law == "cutoff") {
      c.law = CutoffNonEquilibriumLaw{o.c1, o.c2, CutoffFunction{o.cutoff_a, o.cutoff_w}};
    } else if (o.law == "equilibrium") {
      c.law = EquilibriumLaw{o.c};
    } else {
      throw ConfigError("unknown exchange law \"" + o.law +
                        "\" (expected noneq, cutoff, or equilibrium)");
    }
  }
  const RunArtifacts art = run(c);
  std::printf("stationary solve converged after %ld iterations\n", art.steps);
  std::printf("  residuals:   %s\n", art.csv_path.c_str());
  std::printf("  final state: %s\n", art.final_state_path.c_str());
  std::printf("  final image: %s\n", art.pgm_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raftsim: bulk-surface membrane phase separation toolkit"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* cmd_run = app.add_subcommand("run", "integrate one model and write time series");
  add_common(cmd_run, run_opts);

  CommonOpts sweep_d_opts;
  std::vector<double> D_values = {1.0, 4.0, 16.0, 64.0};
  double sweep_d_t_end = 0.25;
  CLI::App* cmd_sweep_d =
      app.add_subcommand("sweep-D", "vary the bulk diffusivity and fit a gradient decay slope");
  add_common(cmd_sweep_d, sweep_d_opts);
  cmd_sweep_d->add_option("--D-values", D_values, "diffusivities (comma separated)")
      ->delimiter(',');
  CLI::Option* sweep_d_t_opt =
      cmd_sweep_d->add_option("--t-end", sweep_d_t_end, "final time for each member run");

  CommonOpts sweep_delta_opts;
  std::vector<double> deltas = {0.2, 0.1, 0.05};
  double sweep_delta_t_end = 0.25;
  CLI::App* cmd_sweep_delta = app.add_subcommand(
      "sweep-delta", "compare the reduced model against its sharp-exchange limit");
  add_common(cmd_sweep_delta, sweep_delta_opts);
  cmd_sweep_delta->add_option("--deltas", deltas, "exchange scales (comma separated)")
      ->delimiter(',');
  CLI::Option* sweep_delta_t_opt =
      cmd_sweep_delta->add_option("--t-end", sweep_delta_t_end, "final time for each member run");

  CommonOpts refine_opts;
  std::vector<int> N_values = {24, 32, 48, 64};
  std::vector<double> dt_values = {8e-5, 4e-5, 2e-5, 1e-5};
  double refine_t_end = 0.0;
  CLI::App* cmd_refine =
      app.add_subcommand("refine", "grid and time step self-convergence study");
  add_common(cmd_refine, refine_opts);
  cmd_refine->add_option("--N-values", N_values, "grid sizes (comma separated, increasing)")
      ->delimiter(',');
  cmd_refine->add_option("--dt-values", dt_values, "step sizes (comma separated, decreasing)")
      ->delimiter(',');
  CLI::Option* refine_t_opt =
      cmd_refine->add_option("--t-end", refine_t_end, "final time for each member run");

  CommonOpts stationary_opts;
  StationaryOpts st;
  CLI::App* cmd_stationary =
      app.add_subcommand("stationary", "solve for a stationary state of the reduced model");
  add_common(cmd_stationary, stationary_opts);
  cmd_stationary->add_option("--m", st.m, "surface average of the order parameter");
  cmd_stationary->add_option("--M", st.M, "total conserved mass");
  cmd_stationary->add_option("--eps", st.eps, "interface width");
  cmd_stationary->add_option("--delta", st.delta, "exchange scale");
  cmd_stationary->add_option("--tol", st.tol, "residual tolerance");
  cmd_stationary->add_option("--alpha", st.alpha, "fixed point damping in (0, 1]");
  cmd_stationary->add_option("--max-iters", st.max_iters, "iteration cap");
  cmd_stationary->add_option("--law", st.law, "exchange law: noneq, cutoff, or equilibrium");
  cmd_stationary->add_option("--c", st.c, "relaxation rate for the equilibrium law");
  cmd_stationary->add_option("--c1", st.c1, "adsorption rate");
  cmd_stationary->add_option("--c2", st.c2, "desorption rate");
  cmd_stationary->add_option("--cutoff-a", st.cutoff_a, "cutoff plateau half width");
  cmd_stationary->add_option("--cutoff-w", st.cutoff_w, "cutoff blend width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_run) return run_main(run_opts);
    if (*cmd_sweep_d)
      return sweep_d_main(sweep_d_opts, D_values, sweep_d_t_end, sweep_d_t_opt->count() > 0);
    if (*cmd_sweep_delta)
      return sweep_delta_main(sweep_delta_opts, deltas, sweep_delta_t_end,
                              sweep_delta_t_opt->count() > 0);
    if (*cmd_refine)
      return refine_main(refine_opts, N_values, dt_values, refine_t_end,
                         refine_t_opt->count() > 0);
    if (*cmd_stationary) return stationary_main(stationary_opts, st, cmd_stationary);
    std::fprintf(stderr, "error: no subcommand selected\n");
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
