#pragma once

#include <variant>

#include "raftsim/fields.hpp"

namespace raftsim {

// Smooth saturation used by the cutoff exchange law: identity on [-a, a],
// then a tanh blend of width w, so |eta| <= a + w and eta is C^1 with
// eta'(+-a) = 1.
struct CutoffFunction {
  double a = 1.0;
  double w = 1.0;
  double operator()(double s) const;
  bool operator==(const CutoffFunction&) const = default;
};

double eval_eta(const CutoffFunction& cf, double s);

// Exchange laws for the bulk-surface mass flux q on the membrane.
//   Equilibrium:    q = -c (theta - u)          (pure relaxation, c >= 0)
//   NonEquilibrium: q = c1 u (1 - v) - c2 v     (adsorption/desorption)
//   Cutoff:         q = c1 u - c1 eta(u) v - c2 v   (bounded coefficients)
struct EquilibriumLaw {
  double c = 1.0;
  bool operator==(const EquilibriumLaw&) const = default;
};

struct NonEquilibriumLaw {
  double c1 = 1.0;
  double c2 = 1.0;
  bool operator==(const NonEquilibriumLaw&) const = default;
};

struct CutoffNonEquilibriumLaw {
  double c1 = 1.0;
  double c2 = 1.0;
  CutoffFunction cutoff;
  bool operator==(const CutoffNonEquilibriumLaw&) const = default;
};

using ExchangeLaw = std::variant<EquilibriumLaw, NonEquilibriumLaw, CutoffNonEquilibriumLaw>;

void validate(const ExchangeLaw& law);

// Pointwise evaluation of q on the grid followed by cubic dealiasing; the
// returned field carries the dealiased coefficients (its grid samples are
// the band-limited ones).  u_trace, v, theta must share one grid.
SurfaceField eval_q(const ExchangeLaw& law, const SurfaceField& u_trace, const SurfaceField& v,
                    const SurfaceField& theta);

// int_G q for the same arguments (zero mode of the dealiased product times
// the area; dealiasing never touches the zero mode).
double q_surface_integral(const ExchangeLaw& law, const SurfaceField& u_trace,
                          const SurfaceField& v, const SurfaceField& theta);

// Convenience for spatially constant bulk density.
SurfaceField eval_q(const ExchangeLaw& law, double u_const, const SurfaceField& v,
                    const SurfaceField& theta);
double q_surface_integral(const ExchangeLaw& law, double u_const, const SurfaceField& v,
                          const SurfaceField& theta);

}  // namespace raftsim
