#pragma once

#include <string>
#include <vector>

#include "raftsim/config.hpp"
#include "raftsim/fields.hpp"

namespace raftsim {

// Least-squares fit of log y against log x (y ~ C x^slope); residual_rms is
// the root-mean-square misfit in log space.  Needs at least 3 strictly
// positive points with non-degenerate abscissae.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  int points = 0;
};

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Radial frequency shell carrying the most spectral mass of the mean-free
// part; a descriptive pattern diagnostic (no thresholds attached).
int dominant_mode(const SurfaceField& f);

// One swept parameter: raw per-member observables plus one fitted summary.
// fit_kind is "loglog-lsq" for a least-squares power-law fit, "order-ratio"
// when the slope comes from consecutive-difference ratios (two-point
// refinement data), and "none" when the data does not support a fit (too few
// members, repeated or non-positive values); raw rows are emitted either way.
struct SweepSeries {
  std::string parameter;
  std::vector<double> values;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string fit_observable;
  std::string fit_kind = "none";
  double slope = 0.0;
  double slope_residual = 0.0;
  int fit_points = 0;
};

struct SweepResult {
  std::vector<SweepSeries> series;
};

// Emit a sweep under dir: one <name>.csv per series with the raw rows
// (first column the parameter) and one <name>_fit.csv with the fitted
// summary, so fits never overwrite raw data.  Multi-series results append
// _<parameter> to the base name.
void write_sweep(const SweepResult& result, const std::string& dir, const std::string& name);

// Width of the worker pool for sweep members: min(members, hardware
// concurrency), further capped by the RAFTSIM_THREADS environment variable.
int pool_size(int members);

struct RunArtifacts {
  std::string csv_path;
  std::vector<std::string> snapshot_paths;
  std::string final_state_path;
  std::string pgm_path;
  long steps = 0;
};

// One simulation (or stationary solve) with file output under
// config.output.dir:
//   - a time-series CSV ("series.csv"; "residuals.csv" for the stationary
//     model) at the configured cadence,
//   - numbered state snapshots at the snapshot cadence,
//   - the final state ("final.state") and a rendering of the final phi
//     ("phi_final.pgm").
// Deterministic: a fixed seed gives byte-identical outputs.  Invalid
// configurations raise ConfigError with a full validation report before
// anything runs; a blow-up writes the last finite state to
// "last_finite.state" and raises IntegrationError.
RunArtifacts run(const RunConfig& config);

// Large-diffusivity sweep of the coupled model: every member starts from the
// same seeded state on the same grid and runs to t_end with its own D.
// Per member the time integral of int_B |grad u|^2 (trapezoid in t) and the
// distance e_red = |surface average of the trace of u - u_reduced|(t_end)
// against one reduced-model twin run.  The fitted slope of the gradient
// integral against D is the series summary.  Needs at least 3 values.
SweepResult sweep_D(const RunConfig& config, const std::vector<double>& D_values);

// Interaction-strength sweep of the reduced model against its small-delta
// limit; columns delta, error_l2, u_final as produced by the comparison
// harness, plus a fitted slope of error_l2 against delta when the data
// supports one.  Requires the plain non-equilibrium law.
SweepResult sweep_delta(const RunConfig& config, const std::vector<double>& deltas);

// Self-convergence under refinement with band-limited smooth initial data
// (identical across resolutions).  Two series:
//   - "dt": fixed grid, one run per step size, errors measured against the
//     run with the smallest dt; the slope is the observed temporal order
//     from consecutive-run differences fitted against the step-size gaps.
//   - "N": fixed dt, one run per grid size, errors against the largest N
//     after exact spectral prolongation; smooth data decays faster than any
//     power, so these errors fall steeply.
// Every dt must divide t_end so all members land on the same final time.
// Needs at least 3 entries per list ("insufficient resolutions" otherwise).
SweepResult refinement_study(const RunConfig& config, const std::vector<int>& N_values,
                             const std::vector<double>& dt_values);

}  // namespace raftsim
