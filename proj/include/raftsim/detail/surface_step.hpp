#pragma once

#include <utility>
#include <vector>

#include "raftsim/fields.hpp"

namespace raftsim::detail {

// One linearly-implicit step of the surface pair in spectral space, written
// in the variables (phi_hat, s_hat) with s = 2v - 1 - phi and
// theta = (2/delta) s.  Per mode k with lam = |k|^2 the scheme solves
//
//   (1 + dt lam (eps lam + S)) phi+ - (dt lam / delta) s+
//       = (1 + dt lam S) phi - dt lam eps^{-1} w
//   phi+ + (1 + 4 dt lam / delta) s+ = s + phi + 2 dt q
//
// where w is the dealiased transform of W'(phi) and q the single shared
// exchange evaluation of the step.  The determinant is positive for any dt,
// so the solve never fails.  The zero mode is handled exactly: phi is
// unchanged and s gains 2 dt q_0.
void surface_pair_step(const TorusGeometry& g, double eps, double delta, double dt, double stab,
                       const std::vector<cplx>& phi_hat, const std::vector<cplx>& s_hat,
                       const std::vector<cplx>& wprime_hat, const std::vector<cplx>& q_hat,
                       std::vector<cplx>& phi_out, std::vector<cplx>& s_out);

// Dealiased transform of W'(phi).
SurfaceField dealiased_wprime(const SurfaceField& phi);

// s_hat = 2 v_hat - phi_hat with the constant removed from the zero mode.
std::vector<cplx> s_hat_of(const SurfaceField& phi, const SurfaceField& v);

// Surface free energy: int (eps/2)|grad phi|^2 + eps^{-1} W(phi)
//                      + (2 delta)^{-1} (2v - 1 - phi)^2.
double surface_free_energy(const SurfaceField& phi, const SurfaceField& v, double eps,
                           double delta);

// Chemical potentials (mu, theta) with
//   mu = -eps Lap phi + eps^{-1} W'(phi) - delta^{-1} s,   theta = (2/delta) s,
// where s = 2v - 1 - phi and W' is dealiased.
std::pair<SurfaceField, SurfaceField> surface_potentials(const SurfaceField& phi,
                                                         const SurfaceField& v, double eps,
                                                         double delta);

}  // namespace raftsim::detail
