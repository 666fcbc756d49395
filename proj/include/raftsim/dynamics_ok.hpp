#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "raftsim/fields.hpp"
#include "raftsim/model.hpp"

namespace raftsim {

// Small-interaction limit of the reduced model: a single mean-free order
// parameter driven by a nonlocal Ohta-Kawasaki potential, coupled to the
// scalar bulk density.  bulk_volume and total_mass feed the scalar equation,
// which is autonomous for the plain non-equilibrium law.
struct OKState {
  double t = 0.0;
  SurfaceField phi;
  double u = 0.0;
  double bulk_volume = 1.0;
  double total_mass = 1.0;
};

// Mean-free solution sigma of  Lap sigma = ((c1 u + c2)/2) phi  on the
// surface; per mode sigma_hat = -((c1 u + c2)/2) phi_hat / |k|^2.
SurfaceField sigma_solve(const SurfaceField& phi, double u, double c1, double c2);

// One linearly implicit step: sigma and the dealiased, mean-projected
// W'(phi) explicit (with stabilizer), the fourth-order term implicit, all
// scaled by the 4/5 mobility from (5/4) mu = -eps Lap phi
// + eps^{-1} P W'(phi) - sigma/2; u advances by an Euler increment of the
// closed-form scalar equation.
OKState step_ok(const OKState& st, const ModelParams& p, double c1, double c2);

// Per-mode amplification factor of step_ok linearized about phi = 0
// (W' ~ -4 phi), used as a stability oracle.
double ok_step_multiplier(double lambda, double u, const ModelParams& p, double c1, double c2);

// Continuous-time growth rate of the same linearization.
double ok_growth_rate(double lambda, double u, const ModelParams& p, double c1, double c2);

// Shared setup for the comparison harness: both models start from the
// mean-free part of a seeded noise field, with v slaved so the relaxation
// variable starts in equilibrium, and run to t_end with the plain
// non-equilibrium law.
struct SweepConfig {
  int n = 64;
  double length = 1.0;
  double eps = 0.04;
  double dt = 1e-4;
  double t_end = 0.25;
  double c1 = 1.0;
  double c2 = 1.0;
  double noise_amp = 0.05;
  std::uint64_t seed = 42;
  double u0 = 0.5;
  double bulk_volume = 1.0;
  double total_mass = 1.0;
};

struct DeltaSweepRow {
  double delta = 0.0;
  double error_l2 = 0.0;
  double u_final = 0.0;
};

// Final mean-free phi and u of the reduced model at interaction strength
// delta, from the shared initial data.
std::pair<SurfaceField, double> run_reduced_final(const SweepConfig& cfg, double delta);

// Final phi and u of the limit model from the same initial data.
std::pair<SurfaceField, double> run_ok_final(const SweepConfig& cfg);

// L2 distance between the reduced and limit solutions at t_end for each
// delta; rows are ordered as the input list.
std::vector<DeltaSweepRow> delta_sweep(const SweepConfig& cfg, const std::vector<double>& deltas);

}  // namespace raftsim
