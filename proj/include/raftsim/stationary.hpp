#pragma once

#include <utility>

#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/exchange.hpp"
#include "raftsim/fields.hpp"
#include "raftsim/model.hpp"

namespace raftsim {

// Stationary states of the reduced model.  With time derivatives removed,
// the mean-free part of the system on the surface reads
//
//   0 = -eps Lap phi + eps^{-1} P W'(phi + m/|G|) - theta / 2
//   0 = Lap theta + P q(u, v)
//   theta = (2/delta)(2 v - phi)
//
// for mean-free (phi, v, theta), while the scalar means (u, v_mean) are
// fixed by int_G q = 0 together with the combined-mass constraint
// |B| u + |G| v_mean = M.  P is the mean-free projection; every
// nonlinearity is dealiased exactly as in the time steppers, so discrete
// stationary points found here are fixed points of step_reduced.

struct StationaryConfig {
  double m = 0.0;     // prescribed int_G phi
  double M = 1.0;     // prescribed combined mass |B| u + int_G v
  ExchangeLaw law = NonEquilibriumLaw{};
  ModelParams p;
  double bulk_volume = 1.0;  // |B| of the collapsed bulk compartment
  double alpha = 0.5;        // damping of the v update, in (0, 1]
  double tol = 1e-9;         // target for all residual sup norms
  int max_iters = 400;

  void validate() const;
};

// Sup-norm residuals of the stationary system, one entry per equation plus
// the two scalar mean conditions.
struct StationaryResiduals {
  double mu = 0.0;            // chemical-potential equation
  double v_equation = 0.0;    // Lap theta + P q
  double constitutive = 0.0;  // theta - (2/delta)(2v - phi)
  double q_mean = 0.0;        // |int_G q|
  double mass = 0.0;          // ||B| u + |G| v_mean - M|
  double max() const;
};

struct StationarySolution {
  SurfaceField phi;    // mean-free
  SurfaceField v;      // mean-free
  SurfaceField theta;  // mean-free
  double u_mean = 0.0;
  double v_mean = 0.0;
  StationaryResiduals residuals;
  int iterations = 0;
};

// Mean values (u, v_mean) solving int_G q(u, v_tilde + v_mean) = 0 together
// with |B| u + |G| v_mean = M, for a mean-free v_tilde.  The plain
// non-equilibrium law reduces to the quadratic
//   c1 |B| u^2 + (c2 |B| + c1 |G| - M c1) u - M c2 = 0
// with the root in [0, M/|B|]; other laws are solved by bisection in u over
// [0, M/|B|] after eliminating v_mean through the mass constraint.  The
// equilibrium law is rejected (condition-violated): its rate depends on the
// potential theta rather than on (u, v), so the system is not closed in
// these variables.
std::pair<double, double> mean_value_solve(const ExchangeLaw& law, const SurfaceField& v_tilde,
                                           double M, double bulk_volume, double surface_area);

// Solve A phi = f on the mean-free subspace, where
//   A phi = -eps Lap phi + (4/eps) P dealias((phi + phi_mean)^3)
// and phi_mean is the mean of the full order parameter (the convex term is
// evaluated on the translated field, so prescribed-mass problems reduce to
// this mean-free form).  A is strictly monotone, hence the solution is
// unique and independent of the start.  Newton iteration with sup-norm line
// search; the Jacobian solves use conjugate gradients preconditioned by the
// spectral diagonal (eps lam + (12/eps) max (phi + phi_mean)^2)^{-1}.
// init, when given, seeds the iteration (default: zero).
SurfaceField newton_semilinear(const SurfaceField& f, double eps, double tol,
                               double phi_mean = 0.0, const SurfaceField* init = nullptr,
                               int max_iters = 60);

// Damped fixed-point iteration for the stationary system.  One sweep
// computes the means, solves the theta Poisson equation with the current q,
// solves the phi equation by newton_semilinear with the concave -4 phi part
// of W' lagged at the previous phi, and relaxes
//   v <- (1 - alpha) v + alpha ((delta/4) theta + phi/2).
// Iterates until every residual is below cfg.tol; throws a non-convergence
// error carrying the residual history when max_iters sweeps do not get
// there.  init_v is the starting mean-free v; init_phi, when given, seeds
// the lagged phi (default: zero, which selects the homogeneous branch for
// init_v = 0).
StationarySolution fixed_point_iterate(const StationaryConfig& cfg, const SurfaceField& init_v,
                                       const SurfaceField* init_phi = nullptr);

// Residual report for an arbitrary candidate; pure verification, usable on
// solver output or on time-marched near-steady states.
StationaryResiduals stationary_residuals(const StationarySolution& sol,
                                         const StationaryConfig& cfg);

// Embed a stationary solution as a reduced-model state with the prescribed
// means reinstated (t = 0).
ReducedState as_reduced_state(const StationarySolution& sol, const StationaryConfig& cfg);

}  // namespace raftsim
