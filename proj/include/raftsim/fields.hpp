#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "raftsim/errors.hpp"

namespace raftsim {

using cplx = std::complex<double>;

// Flat square torus of side length L sampled on an N x N uniform grid.
// Fourier modes carry integer frequencies n in {-N/2+1, ..., N/2} per axis
// with wavenumber k = (2*pi/L) * n.
struct TorusGeometry {
  int n = 0;
  double length = 1.0;

  TorusGeometry() = default;
  TorusGeometry(int n_, double length_);

  double area() const { return length * length; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }

  // Signed integer frequency of grid index i in [0, n).
  int freq(int i) const { return i <= n / 2 ? i : i - n; }
  double wavenumber(int i) const;
  // |k|^2 of the horizontal mode with grid indices (i1, i2).
  double lambda(int i1, int i2) const;

  bool operator==(const TorusGeometry&) const = default;
};

// Slab B = torus x (0, H).  Vertical dependence is expanded in the Neumann
// cosine basis cos(m*pi*z/H), m = 0..mz-1.
struct SlabGeometry {
  TorusGeometry base;
  double height = 1.0;
  int mz = 2;

  SlabGeometry() = default;
  SlabGeometry(TorusGeometry base_, double height_, int mz_);

  double volume() const { return base.area() * height; }
  std::size_t size() const { return base.size() * static_cast<std::size_t>(mz); }
  // Eigenvalue |k|^2 + (m*pi/H)^2 of -Laplace on mode ((i1,i2), m).
  double lambda(int i1, int i2, int m) const;

  bool operator==(const SlabGeometry&) const = default;
};

// Real scalar field on the torus, kept in two synchronized representations:
// grid samples values[i2*N + i1] at x = (i1, i2) * L / N, and Fourier
// coefficients coeffs[j2*N + j1] with values = sum c_j exp(+i k_j . x).
// Whichever representation was written last is authoritative; the other is
// recomputed lazily on access.  The zero-mode coefficient equals the mean.
// Value-semantic; concurrent use of *distinct* fields is safe.
class SurfaceField {
 public:
  SurfaceField() = default;
  explicit SurfaceField(TorusGeometry g);
  static SurfaceField constant(TorusGeometry g, double value);
  static SurfaceField from_values(TorusGeometry g, std::vector<double> vals);
  static SurfaceField from_coeffs(TorusGeometry g, std::vector<cplx> coeffs);

  const TorusGeometry& geometry() const { return geom_; }
  int n() const { return geom_.n; }

  const std::vector<double>& values() const;
  std::vector<double>& mutable_values();
  double value(int i1, int i2) const;

  const std::vector<cplx>& coeffs() const;
  std::vector<cplx>& mutable_coeffs();
  cplx coeff(int i1, int i2) const;

  double mean() const;
  bool finite() const;

 private:
  void require_grid() const;
  void require_spec() const;

  TorusGeometry geom_;
  mutable std::vector<double> grid_;
  mutable std::vector<cplx> spec_;
  mutable bool grid_valid_ = false;
  mutable bool spec_valid_ = false;
};

// Real scalar field on the slab, stored as Fourier-cosine coefficients
// c[(m*N + j2)*N + j1]:  u(x, z) = sum_m sum_j c_{j,m} exp(i k_j . x)
// cos(m*pi*z/H).  Grid samples are produced on demand for output.
class BulkField {
 public:
  BulkField() = default;
  explicit BulkField(SlabGeometry g);
  static BulkField constant(SlabGeometry g, double value);
  static BulkField from_coeffs(SlabGeometry g, std::vector<cplx> coeffs);
  // Reconstruct coefficients from samples at vertical midpoints
  // z_j = (j + 1/2) H / mz (exactly mz levels), each level an N x N grid
  // in the same row-major layout as SurfaceField::values().
  static BulkField from_samples(SlabGeometry g, const std::vector<double>& vals);

  const SlabGeometry& geometry() const { return geom_; }

  const std::vector<cplx>& coeffs() const { return spec_; }
  std::vector<cplx>& mutable_coeffs() { return spec_; }
  cplx coeff(int i1, int i2, int m) const;

  // Samples at nz vertical midpoint levels, layout [iz][i2][i1].
  std::vector<double> sample_grid(int nz) const;

  double mean() const;  // volume average = coefficient of the (0, 0) mode
  bool finite() const;

 private:
  SlabGeometry geom_;
  std::vector<cplx> spec_;
};

// Low-level transform helpers (normalized so that the forward transform of
// a constant puts that constant in the zero mode).
void fft2_forward(int n, const double* grid, cplx* coeffs);
void fft2_backward(int n, const cplx* coeffs, double* grid);

}  // namespace raftsim
