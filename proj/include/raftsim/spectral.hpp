#pragma once

#include "raftsim/fields.hpp"

namespace raftsim {

// Round-trip both representations of a field (grid -> coefficients -> grid).
SurfaceField surface_transform(const SurfaceField& f);

// Surface Laplacian: multiplies mode k by -|k|^2.
SurfaceField laplace_beltrami(const SurfaceField& f);

// Integral over the surface = zero-mode coefficient times the area.
double surface_integral(const SurfaceField& f);
double surface_mean(const SurfaceField& f);

// Remove the mean: P f = f - |G|^{-1} int f.  Idempotent.
SurfaceField mean_free_project(const SurfaceField& f);

// Solve (a - b Lap) x = rhs mode by mode.  For a = 0 the system is singular
// on constants: the right-hand side must be mean-free (|mean| <= 1e-10,
// otherwise SingularSystemError) and the zero mode of x is set to zero.
SurfaceField solve_surface_helmholtz(double a, double b, const SurfaceField& rhs);

// 2/3-rule dealiasing: zero every mode with |n_i| > N/3 on either axis.
SurfaceField dealias_cubic(const SurfaceField& f);
void dealias_cubic_inplace(const TorusGeometry& g, std::vector<cplx>& coeffs);
bool dealias_keeps(const TorusGeometry& g, int i1, int i2);

// Trace of a bulk field on the surface z = 0: per horizontal mode the sum of
// all vertical cosine coefficients.
SurfaceField bulk_trace(const BulkField& u);

// Integral over the slab = (0,0)-mode coefficient times the volume.
double bulk_integral(const BulkField& u);

// int_B |grad u|^2 and int_B u^2 via coefficients.
double bulk_gradient_norm_sq(const BulkField& u);
double bulk_l2_norm_sq(const BulkField& u);

// int_G |grad f|^2 and int_G f^2 via coefficients.
double surface_gradient_norm_sq(const SurfaceField& f);
double surface_l2_norm_sq(const SurfaceField& f);

// L2 and sup distances between fields on the same grid.
double l2_distance(const SurfaceField& a, const SurfaceField& b);
double sup_distance(const SurfaceField& a, const SurfaceField& b);
double max_abs(const SurfaceField& f);

// Pointwise grid arithmetic (results carry grid representation).
SurfaceField add(const SurfaceField& a, const SurfaceField& b);
SurfaceField sub(const SurfaceField& a, const SurfaceField& b);
SurfaceField scale(const SurfaceField& a, double s);
SurfaceField add_scaled(const SurfaceField& a, double s, const SurfaceField& b);

}  // namespace raftsim
