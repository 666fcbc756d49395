#include "raftsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace raftsim {

namespace {

void check_same_grid(const SurfaceField& a, const SurfaceField& b) {
  if (!(a.geometry() == b.geometry())) throw ConfigError("fields live on different grids");
}

}  // namespace

SurfaceField surface_transform(const SurfaceField& f) {
  SurfaceField g = f;
  g.coeffs();
  g.values();
  return g;
}

SurfaceField laplace_beltrami(const SurfaceField& f) {
  const TorusGeometry& g = f.geometry();
  std::vector<cplx> out(f.coeffs());
  const int n = g.n;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1)
      out[static_cast<std::size_t>(i2) * n + i1] *= -g.lambda(i1, i2);
  return SurfaceField::from_coeffs(g, std::move(out));
}

double surface_integral(const SurfaceField& f) { return f.mean() * f.geometry().area(); }

double surface_mean(const SurfaceField& f) { return f.mean(); }

SurfaceField mean_free_project(const SurfaceField& f) {
  SurfaceField g = f;
  g.mutable_coeffs()[0] = cplx(0.0, 0.0);
  return g;
}

SurfaceField solve_surface_helmholtz(double a, double b, const SurfaceField& rhs) {
  const TorusGeometry& g = rhs.geometry();
  std::vector<cplx> out(rhs.coeffs());
  const int n = g.n;
  if (a == 0.0) {
    if (std::abs(out[0].real()) > 1e-10 || std::abs(out[0].imag()) > 1e-10)
      throw SingularSystemError("pure-Neumann solve needs a mean-free right-hand side");
    out[0] = cplx(0.0, 0.0);
  }
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      if (i1 == 0 && i2 == 0) {
        if (a != 0.0) out[0] /= a;
        continue;
      }
      out[static_cast<std::size_t>(i2) * n + i1] /= a + b * g.lambda(i1, i2);
    }
  return SurfaceField::from_coeffs(g, std::move(out));
}

bool dealias_keeps(const TorusGeometry& g, int i1, int i2) {
  return 3 * std::abs(g.freq(i1)) <= g.n && 3 * std::abs(g.freq(i2)) <= g.n;
}

void dealias_cubic_inplace(const TorusGeometry& g, std::vector<cplx>& coeffs) {
  const int n = g.n;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1)
      if (!dealias_keeps(g, i1, i2)) coeffs[static_cast<std::size_t>(i2) * n + i1] = cplx(0.0, 0.0);
}

SurfaceField dealias_cubic(const SurfaceField& f) {
  SurfaceField g = f;
  dealias_cubic_inplace(g.geometry(), g.mutable_coeffs());
  return g;
}

SurfaceField bulk_trace(const BulkField& u) {
  const SlabGeometry& g = u.geometry();
  const std::size_t n2 = g.base.size();
  std::vector<cplx> out(n2, cplx(0.0, 0.0));
  const std::vector<cplx>& c = u.coeffs();
  for (int m = 0; m < g.mz; ++m) {
    const cplx* slab = c.data() + static_cast<std::size_t>(m) * n2;
    for (std::size_t i = 0; i < n2; ++i) out[i] += slab[i];
  }
  return SurfaceField::from_coeffs(g.base, std::move(out));
}

double bulk_integral(const BulkField& u) { return u.mean() * u.geometry().volume(); }

double bulk_gradient_norm_sq(const BulkField& u) {
  const SlabGeometry& g = u.geometry();
  const int n = g.base.n;
  const std::size_t n2 = g.base.size();
  const std::vector<cplx>& c = u.coeffs();
  double acc = 0.0;
  for (int m = 0; m < g.mz; ++m) {
    const double gamma = (m == 0) ? 1.0 : 0.5;
    const cplx* slab = c.data() + static_cast<std::size_t>(m) * n2;
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1)
        acc += gamma * g.lambda(i1, i2, m) * std::norm(slab[static_cast<std::size_t>(i2) * n + i1]);
  }
  return g.base.area() * g.height * acc;
}

double bulk_l2_norm_sq(const BulkField& u) {
  const SlabGeometry& g = u.geometry();
  const std::size_t n2 = g.base.size();
  const std::vector<cplx>& c = u.coeffs();
  double acc = 0.0;
  for (int m = 0; m < g.mz; ++m) {
    const double gamma = (m == 0) ? 1.0 : 0.5;
    const cplx* slab = c.data() + static_cast<std::size_t>(m) * n2;
    for (std::size_t i = 0; i < n2; ++i) acc += gamma * std::norm(slab[i]);
  }
  return g.base.area() * g.height * acc;
}

double surface_gradient_norm_sq(const SurfaceField& f) {
  const TorusGeometry& g = f.geometry();
  const int n = g.n;
  const std::vector<cplx>& c = f.coeffs();
  double acc = 0.0;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1)
      acc += g.lambda(i1, i2) * std::norm(c[static_cast<std::size_t>(i2) * n + i1]);
  return g.area() * acc;
}

double surface_l2_norm_sq(const SurfaceField& f) {
  double acc = 0.0;
  for (const cplx& c : f.coeffs()) acc += std::norm(c);
  return f.geometry().area() * acc;
}

double l2_distance(const SurfaceField& a, const SurfaceField& b) {
  check_same_grid(a, b);
  const std::vector<cplx>& ca = a.coeffs();
  const std::vector<cplx>& cb = b.coeffs();
  double acc = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) acc += std::norm(ca[i] - cb[i]);
  return std::sqrt(a.geometry().area() * acc);
}

double sup_distance(const SurfaceField& a, const SurfaceField& b) {
  check_same_grid(a, b);
  const std::vector<double>& va = a.values();
  const std::vector<double>& vb = b.values();
  double m = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

double max_abs(const SurfaceField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

SurfaceField add(const SurfaceField& a, const SurfaceField& b) { return add_scaled(a, 1.0, b); }

SurfaceField sub(const SurfaceField& a, const SurfaceField& b) { return add_scaled(a, -1.0, b); }

SurfaceField scale(const SurfaceField& a, double s) {
  std::vector<double> out(a.values());
  for (double& v : out) v *= s;
  return SurfaceField::from_values(a.geometry(), std::move(out));
}

SurfaceField add_scaled(const SurfaceField& a, double s, const SurfaceField& b) {
  check_same_grid(a, b);
  std::vector<double> out(a.values());
  const std::vector<double>& vb = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * vb[i];
  return SurfaceField::from_values(a.geometry(), std::move(out));
}

}  // namespace raftsim
