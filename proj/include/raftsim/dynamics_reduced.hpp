#pragma once

#include <utility>

#include "raftsim/exchange.hpp"
#include "raftsim/fields.hpp"
#include "raftsim/model.hpp"

namespace raftsim {

// Large-diffusivity limit: the bulk density is spatially constant, so the
// state carries a scalar u together with the surface pair.  bulk_volume is
// the measure |B| of the collapsed bulk compartment.
struct ReducedState {
  double t = 0.0;
  double u = 0.0;
  SurfaceField phi;
  SurfaceField v;
  double bulk_volume = 1.0;
};

// Decomposition of the reduced state into surface means and mean-free parts,
// with theta = (2/delta)(2v - 1 - phi) and
// mu = -eps Lap phi + eps^{-1} W'(phi) - theta/2 split the same way.
struct MeanFreeView {
  SurfaceField phi_mf;
  SurfaceField v_mf;
  SurfaceField theta_mf;
  SurfaceField mu_mf;
  double phi_mean = 0.0;
  double v_mean = 0.0;
  double theta_mean = 0.0;
  double mu_mean = 0.0;
  double bulk_volume = 1.0;
};

// Same surface step as the full model; the scalar bulk density follows
// u' = -|B|^{-1} int_G q evaluated at the current state.
ReducedState step_reduced(const ReducedState& st, const ModelParams& p, const ExchangeLaw& law);

std::pair<SurfaceField, SurfaceField> potentials(const ReducedState& st, const ModelParams& p);
EnergyReport energy(const ReducedState& st, const ModelParams& p, const ExchangeLaw& law);
MassReport masses(const ReducedState& st);

// Closed-form right-hand side of the total-bulk-mass equation
//   U' = -(c1/|B|) U^2 + (c1 (M - |G|)/|B| - c2) U + c2 M
// for the plain non-equilibrium law with spatially constant u = U/|B|.
double u_rhs_closed_form(double U, double c1, double c2, double M, double bulk_volume,
                         double surface_area);

// Unique non-negative root of the right-hand side above; returns the
// equilibrium value of u = U/|B|.
double u_fixed_point(double c1, double c2, double M, double bulk_volume, double surface_area);

MeanFreeView decompose_mean_free(const ReducedState& st, const ModelParams& p);
ReducedState reconstruct(const MeanFreeView& view, double u, double t = 0.0);

// Step of the mean-free reformulation (plain non-equilibrium law only);
// advances (phi_mf, theta_mf) by the same per-mode algebra as step_reduced,
// u by the closed-form scalar equation, and rebuilds the means from the
// conserved masses.
std::pair<MeanFreeView, double> step_reduced_meanfree(const MeanFreeView& view, double u,
                                                      const ModelParams& p, double c1, double c2);

// Law-dispatching convenience; anything but the plain non-equilibrium law is
// rejected, since the reformulation eliminates v only for that law.
std::pair<MeanFreeView, double> step_reduced_meanfree(const MeanFreeView& view, double u,
                                                      const ModelParams& p,
                                                      const ExchangeLaw& law);

}  // namespace raftsim
