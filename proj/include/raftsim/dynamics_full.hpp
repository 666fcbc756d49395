#pragma once

#include <utility>

#include "raftsim/exchange.hpp"
#include "raftsim/fields.hpp"
#include "raftsim/model.hpp"

namespace raftsim {

// State of the coupled bulk-surface model: bulk density u on the slab,
// order parameter phi and surface density v on the membrane.
struct FullState {
  double t = 0.0;
  BulkField u;
  SurfaceField phi;
  SurfaceField v;
};

// Chemical potential mu = -eps Lap phi + eps^{-1} W'(phi) - delta^{-1} s and
// affinity theta = (2/delta) s with s = 2v - 1 - phi.  W'(phi) is dealiased.
std::pair<SurfaceField, SurfaceField> potentials(const FullState& st, const ModelParams& p);

EnergyReport energy(const FullState& st, const ModelParams& p, const ExchangeLaw& law);

MassReport masses(const FullState& st);

// One step of the first-order linearly-implicit scheme: stiff linear terms
// implicit, W'(phi) and q explicit with stabilization S*(phi+ - phi), one
// shared q evaluation for both phases so the combined mass telescopes.
FullState step_imex(const FullState& st, const ModelParams& p, const ExchangeLaw& law);

// Classical fourth-order Runge-Kutta on the same spatial discretization,
// restricted to small grids (N <= 16); used as a reference integrator.
FullState reference_rk4(const FullState& st, const ModelParams& p, const ExchangeLaw& law,
                        double dt_ref, long steps);

// Discrete energy balance across one accepted step.
DissipationReport dissipation_check(const FullState& prev, const FullState& next,
                                    const ModelParams& p, const ExchangeLaw& law);

}  // namespace raftsim
