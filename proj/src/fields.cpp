#include "raftsim/fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <unordered_map>

namespace raftsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW plan creation is not thread-safe, execution on distinct buffers is.
// Plans are cached per grid size (created once under a lock on an aligned
// probe buffer) and always executed on per-thread fftw_malloc'ed scratch,
// so the alignment class seen at execution matches the one seen at planning.
// FFTW_ESTIMATE keeps plan construction deterministic.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair get_plans(int n) {
  static std::mutex mtx;
  static std::unordered_map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  fftw_complex* probe = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(n, n, probe, probe, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_2d(n, n, probe, probe, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(probe);
  cache.emplace(n, p);
  return p;
}

struct Scratch {
  fftw_complex* buf = nullptr;
  std::size_t cap = 0;
  ~Scratch() {
    if (buf) fftw_free(buf);
  }
  fftw_complex* ensure(std::size_t count) {
    if (cap < count) {
      if (buf) fftw_free(buf);
      buf = fftw_alloc_complex(count);
      cap = count;
    }
    return buf;
  }
};

thread_local Scratch tl_scratch;

}  // namespace

void fft2_forward(int n, const double* grid, cplx* coeffs) {
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  fftw_complex* s = tl_scratch.ensure(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    s[i][0] = grid[i];
    s[i][1] = 0.0;
  }
  fftw_execute_dft(get_plans(n).fwd, s, s);
  const double scale = 1.0 / static_cast<double>(n2);
  for (std::size_t i = 0; i < n2; ++i) coeffs[i] = cplx(s[i][0] * scale, s[i][1] * scale);
}

void fft2_backward(int n, const cplx* coeffs, double* grid) {
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  fftw_complex* s = tl_scratch.ensure(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    s[i][0] = coeffs[i].real();
    s[i][1] = coeffs[i].imag();
  }
  fftw_execute_dft(get_plans(n).bwd, s, s);
  for (std::size_t i = 0; i < n2; ++i) grid[i] = s[i][0];
}

TorusGeometry::TorusGeometry(int n_, double length_) : n(n_), length(length_) {
  if (n < 4 || n % 2 != 0) throw ConfigError("grid size must be even and at least 4");
  if (!(length > 0.0)) throw ConfigError("torus side length must be positive");
}

double TorusGeometry::wavenumber(int i) const { return 2.0 * kPi / length * freq(i); }

double TorusGeometry::lambda(int i1, int i2) const {
  const double k1 = wavenumber(i1);
  const double k2 = wavenumber(i2);
  return k1 * k1 + k2 * k2;
}

SlabGeometry::SlabGeometry(TorusGeometry base_, double height_, int mz_)
    : base(base_), height(height_), mz(mz_) {
  if (!(height > 0.0)) throw ConfigError("slab height must be positive");
  if (mz < 2) throw ConfigError("slab needs at least two vertical modes");
}

double SlabGeometry::lambda(int i1, int i2, int m) const {
  const double kz = kPi * m / height;
  return base.lambda(i1, i2) + kz * kz;
}

SurfaceField::SurfaceField(TorusGeometry g)
    : geom_(g), spec_(g.size(), cplx(0.0, 0.0)), spec_valid_(true) {}

SurfaceField SurfaceField::constant(TorusGeometry g, double value) {
  SurfaceField f(g);
  f.spec_[0] = cplx(value, 0.0);
  f.grid_.assign(g.size(), value);
  f.grid_valid_ = true;
  return f;
}

SurfaceField SurfaceField::from_values(TorusGeometry g, std::vector<double> vals) {
  if (vals.size() != g.size()) throw ConfigError("value array does not match grid size");
  SurfaceField f;
  f.geom_ = g;
  f.grid_ = std::move(vals);
  f.grid_valid_ = true;
  f.spec_valid_ = false;
  return f;
}

SurfaceField SurfaceField::from_coeffs(TorusGeometry g, std::vector<cplx> coeffs) {
  if (coeffs.size() != g.size()) throw ConfigError("coefficient array does not match grid size");
  SurfaceField f;
  f.geom_ = g;
  f.spec_ = std::move(coeffs);
  f.spec_valid_ = true;
  f.grid_valid_ = false;
  return f;
}

void SurfaceField::require_grid() const {
  if (grid_valid_) return;
  if (!spec_valid_) throw RaftError("field has no representation");
  grid_.resize(geom_.size());
  fft2_backward(geom_.n, spec_.data(), grid_.data());
  grid_valid_ = true;
}

void SurfaceField::require_spec() const {
  if (spec_valid_) return;
  if (!grid_valid_) throw RaftError("field has no representation");
  spec_.resize(geom_.size());
  fft2_forward(geom_.n, grid_.data(), spec_.data());
  spec_valid_ = true;
}

const std::vector<double>& SurfaceField::values() const {
  require_grid();
  return grid_;
}

std::vector<double>& SurfaceField::mutable_values() {
  require_grid();
  spec_valid_ = false;
  return grid_;
}

double SurfaceField::value(int i1, int i2) const {
  require_grid();
  return grid_[static_cast<std::size_t>(i2) * geom_.n + i1];
}

const std::vector<cplx>& SurfaceField::coeffs() const {
  require_spec();
  return spec_;
}

std::vector<cplx>& SurfaceField::mutable_coeffs() {
  require_spec();
  grid_valid_ = false;
  return spec_;
}

cplx SurfaceField::coeff(int i1, int i2) const {
  require_spec();
  return spec_[static_cast<std::size_t>(i2) * geom_.n + i1];
}

double SurfaceField::mean() const {
  require_spec();
  return spec_[0].real();
}

bool SurfaceField::finite() const {
  if (spec_valid_) {
    double acc = 0.0;
    for (const cplx& c : spec_) acc += std::norm(c);
    return std::isfinite(acc);
  }
  double acc = 0.0;
  for (double v : grid_) acc += v * v;
  return std::isfinite(acc);
}

BulkField::BulkField(SlabGeometry g) : geom_(g), spec_(g.size(), cplx(0.0, 0.0)) {}

BulkField BulkField::constant(SlabGeometry g, double value) {
  BulkField f(g);
  f.spec_[0] = cplx(value, 0.0);
  return f;
}

BulkField BulkField::from_coeffs(SlabGeometry g, std::vector<cplx> coeffs) {
  if (coeffs.size() != g.size()) throw ConfigError("coefficient array does not match slab size");
  BulkField f;
  f.geom_ = g;
  f.spec_ = std::move(coeffs);
  return f;
}

BulkField BulkField::from_samples(SlabGeometry g, const std::vector<double>& vals) {
  if (vals.size() != g.size()) throw ConfigError("sample array does not match slab size");
  const int n = g.base.n;
  const std::size_t n2 = g.base.size();
  BulkField f(g);
  // Vertical cosine quadrature at midpoints is exact for mz modes:
  // c_m = (s_m / mz) * sum_j x_j cos(m pi (j+1/2) / mz), s_0 = 1, s_m = 2.
  std::vector<double> level(n2);
  std::vector<cplx> level_hat(n2);
  for (int m = 0; m < g.mz; ++m) {
    const double sm = (m == 0) ? 1.0 : 2.0;
    for (std::size_t i = 0; i < n2; ++i) level[i] = 0.0;
    for (int j = 0; j < g.mz; ++j) {
      const double c = std::cos(kPi * m * (j + 0.5) / g.mz);
      const double* slab = vals.data() + static_cast<std::size_t>(j) * n2;
      for (std::size_t i = 0; i < n2; ++i) level[i] += slab[i] * c;
    }
    const double w = sm / g.mz;
    for (std::size_t i = 0; i < n2; ++i) level[i] *= w;
    fft2_forward(n, level.data(), level_hat.data());
    for (std::size_t i = 0; i < n2; ++i) f.spec_[static_cast<std::size_t>(m) * n2 + i] = level_hat[i];
  }
  return f;
}

cplx BulkField::coeff(int i1, int i2, int m) const {
  const std::size_t n = static_cast<std::size_t>(geom_.base.n);
  return spec_[(static_cast<std::size_t>(m) * n + i2) * n + i1];
}

std::vector<double> BulkField::sample_grid(int nz) const {
  if (nz < 1) throw ConfigError("need at least one vertical sample level");
  const int n = geom_.base.n;
  const std::size_t n2 = geom_.base.size();
  std::vector<double> out(static_cast<std::size_t>(nz) * n2, 0.0);
  std::vector<double> level(n2);
  for (int m = 0; m < geom_.mz; ++m) {
    fft2_backward(n, spec_.data() + static_cast<std::size_t>(m) * n2, level.data());
    for (int j = 0; j < nz; ++j) {
      const double c = std::cos(kPi * m * (j + 0.5) / nz);
      double* slab = out.data() + static_cast<std::size_t>(j) * n2;
      for (std::size_t i = 0; i < n2; ++i) slab[i] += level[i] * c;
    }
  }
  return out;
}

double BulkField::mean() const { return spec_[0].real(); }

bool BulkField::finite() const {
  double acc = 0.0;
  for (const cplx& c : spec_) acc += std::norm(c);
  return std::isfinite(acc);
}

}  // namespace raftsim
