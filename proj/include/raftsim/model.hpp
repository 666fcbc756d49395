#pragma once

#include "raftsim/errors.hpp"

namespace raftsim {

// Physical and numerical parameters shared by all model variants.
//   eps   - interface width of the double well
//   delta - relaxation parameter coupling v to (1 + phi)/2
//   D     - bulk diffusivity
//   dt    - time step of the linearly-implicit scheme
//   stab  - stabilization constant S added as S*(phi^{n+1} - phi^n) inside
//           the chemical potential; negative means the default 2/eps
struct ModelParams {
  double eps = 0.04;
  double delta = 0.1;
  double D = 1.0;
  double dt = 1e-4;
  double t_end = 1.0;
  double stab = -1.0;

  bool operator==(const ModelParams&) const = default;

  double stab_effective() const { return stab >= 0.0 ? stab : 2.0 / eps; }

  void validate() const {
    if (!(eps >= 1e-8)) throw ConfigError("eps must be at least 1e-8");
    if (!(delta >= 1e-8)) throw ConfigError("delta must be at least 1e-8");
    if (!(D > 0.0)) throw ConfigError("bulk diffusivity must be positive");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("end time must be non-negative");
  }
};

// Double well W(s) = (1 - s^2)^2 with minima at s = +-1.
inline double double_well(double s) {
  const double r = 1.0 - s * s;
  return r * r;
}
inline double double_well_prime(double s) { return 4.0 * s * s * s - 4.0 * s; }

// Energy bookkeeping for one state:
//   F           surface free energy (interface + well + relaxation penalty)
//   E_bulk      (1/2) int_B u^2
//   E_total     F + E_bulk
//   gnorm_mu    int_G |grad mu|^2
//   gnorm_theta int_G |grad theta|^2
//   gnorm_u     D int_B |grad u|^2
//   exch        int_G q (theta - u)
struct EnergyReport {
  double F = 0.0;
  double E_bulk = 0.0;
  double E_total = 0.0;
  double gnorm_mu = 0.0;
  double gnorm_theta = 0.0;
  double gnorm_u = 0.0;
  double exch = 0.0;
};

// Conserved quantities: surface order-parameter mass and combined mass.
struct MassReport {
  double m = 0.0;
  double M_total = 0.0;
};

// Residual of the discrete energy balance across one step, evaluated with
// midpoint-state gradient norms; scale = 1 + |E_total(next)|.
struct DissipationReport {
  double residual = 0.0;
  double exch = 0.0;
  double scale = 1.0;
};

}  // namespace raftsim
