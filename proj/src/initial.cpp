#include "raftsim/initial.hpp"

#include <cmath>
#include <vector>

#include "raftsim/rng.hpp"
#include "raftsim/spectral.hpp"

namespace raftsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

double smooth_profile(double x, double y) {
  const double tp = 2.0 * kPi;
  return std::cos(tp * x) + 0.7 * std::sin(tp * y) + 0.4 * std::cos(tp * (x + y)) +
         0.2 * std::cos(2.0 * tp * x) * std::sin(tp * y);
}
}  // namespace

SurfaceField ic_surface_noise(const TorusGeometry& g, double mean, double amp, std::uint64_t seed,
                              std::uint64_t stream) {
  NoiseRng rng(seed, stream);
  std::vector<double> v(g.size());
  for (double& x : v) x = mean + amp * rng.uniform_pm1();
  return SurfaceField::from_values(g, std::move(v));
}

SurfaceField ic_surface_smooth(const TorusGeometry& g, double mean, double amp) {
  std::vector<double> v(g.size());
  for (int i2 = 0; i2 < g.n; ++i2)
    for (int i1 = 0; i1 < g.n; ++i1) {
      const double x = static_cast<double>(i1) / g.n;
      const double y = static_cast<double>(i2) / g.n;
      v[static_cast<std::size_t>(i2) * g.n + i1] = mean + amp * smooth_profile(x, y);
    }
  return SurfaceField::from_values(g, std::move(v));
}

BulkField ic_bulk_noise(const SlabGeometry& s, double mean, double amp, std::uint64_t seed,
                        std::uint64_t stream) {
  NoiseRng rng(seed, stream);
  std::vector<double> v(s.size());
  for (double& x : v) x = mean + amp * rng.uniform_pm1();
  return BulkField::from_samples(s, v);
}

BulkField ic_bulk_smooth(const SlabGeometry& s, double mean, double amp) {
  const int n = s.base.n;
  std::vector<double> v(s.size());
  for (int j = 0; j < s.mz; ++j)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        const double x = static_cast<double>(i1) / n;
        const double y = static_cast<double>(i2) / n;
        const double z = (j + 0.5) / s.mz;
        v[(static_cast<std::size_t>(j) * n + i2) * n + i1] =
            mean + amp * (std::cos(2.0 * kPi * x) * std::cos(kPi * z) +
                          0.5 * std::sin(2.0 * kPi * y) * std::cos(2.0 * kPi * z));
      }
  return BulkField::from_samples(s, v);
}

SurfaceField slaved_v(const SurfaceField& phi, double v_total) {
  std::vector<double> v(phi.values());
  for (double& x : v) x = 0.5 * (1.0 + x);
  SurfaceField f = SurfaceField::from_values(phi.geometry(), std::move(v));
  const double shift = (v_total - surface_integral(f)) / phi.geometry().area();
  std::vector<double>& vv = f.mutable_values();
  for (double& x : vv) x += shift;
  return f;
}

}  // namespace raftsim
