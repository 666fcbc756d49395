#include "raftsim/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "raftsim/detail/surface_step.hpp"
#include "raftsim/spectral.hpp"

namespace raftsim {

namespace {

void require_mean_free(const SurfaceField& f, const char* what) {
  if (f.geometry().n <= 0) throw ConfigError(std::string(what) + " must carry a grid");
  if (!f.finite()) throw ConfigError(std::string(what) + " must be finite");
  if (std::abs(f.mean()) > 1e-11 * (1.0 + max_abs(f)))
    throw ConfigError(std::string(what) + " must be mean-free");
}

// A phi = eps (-Lap) phi + (4/eps) P dealias((phi + phi_mean)^3), evaluated
// in spectral space and returned with coefficient representation.
SurfaceField monotone_apply(const SurfaceField& phi, double eps, double phi_mean) {
  const TorusGeometry& g = phi.geometry();
  const int n = g.n;
  const std::vector<double>& pv = phi.values();
  std::vector<double> cube(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double s = pv[i] + phi_mean;
    cube[i] = s * s * s;
  }
  std::vector<cplx> ch(pv.size());
  fft2_forward(n, cube.data(), ch.data());
  dealias_cubic_inplace(g, ch);
  const std::vector<cplx>& ph = phi.coeffs();
  std::vector<cplx> out(ph.size());
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        out[idx] = 0.0;
        continue;
      }
      out[idx] = eps * g.lambda(i1, i2) * ph[idx] + 4.0 / eps * ch[idx];
    }
  }
  return SurfaceField::from_coeffs(g, std::move(out));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Derivative of a band-limited field along one torus axis (dir 0 or 1) by
// Fourier multiplication with i k.
SurfaceField spectral_derivative(const SurfaceField& f, int dir) {
  const TorusGeometry& g = f.geometry();
  const int n = g.n;
  const std::vector<cplx>& fh = f.coeffs();
  std::vector<cplx> out(fh.size());
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      const double k = g.wavenumber(dir == 0 ? i1 : i2);
      out[idx] = cplx(0.0, k) * fh[idx];
    }
  }
  return SurfaceField::from_coeffs(g, std::move(out));
}

// Orthonormal grid-space basis of the translation tangents of a pattern.
// Constant patterns have no tangent and stripe patterns only one; the
// directions that vanish after orthogonalization are skipped.
std::vector<std::vector<double>> translation_basis(const SurfaceField& phi) {
  const std::size_t sz = phi.values().size();
  const double scale2 =
      static_cast<double>(sz) * 1e-24 * (1.0 + max_abs(phi)) * (1.0 + max_abs(phi));
  std::vector<std::vector<double>> basis;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> t = spectral_derivative(phi, dir).values();
    for (const std::vector<double>& e : basis) {
      const double c = dot(t, e);
      for (std::size_t i = 0; i < sz; ++i) t[i] -= c * e[i];
    }
    const double t2 = dot(t, t);
    if (t2 <= scale2) continue;
    const double inv = 1.0 / std::sqrt(t2);
    for (double& v : t) v *= inv;
    basis.push_back(std::move(t));
  }
  return basis;
}

void project_off(const std::vector<std::vector<double>>& basis, std::vector<double>& vec) {
  for (const std::vector<double>& e : basis) {
    const double c = dot(vec, e);
    for (std::size_t i = 0; i < vec.size(); ++i) vec[i] -= c * e[i];
  }
}

// Removes the translate component of a sweep increment. The spectral
// Galerkin equations are equivariant under continuous torus translations,
// so non-constant stationary patterns come in a flat two-parameter family
// of translates and the sweep map is exactly neutral along it. Without
// pinning, solver slack drifts the iterate along that family at a constant
// rate per sweep.
SurfaceField remove_translation_drift(const SurfaceField& dphi, const SurfaceField& phi) {
  const std::vector<std::vector<double>> basis = translation_basis(phi);
  if (basis.empty()) return dphi;
  std::vector<double> d = dphi.values();
  project_off(basis, d);
  return SurfaceField::from_values(dphi.geometry(), std::move(d));
}

// Slope -dq/dv of the exchange laws that are affine in v at constant bulk
// density; these are exactly the laws the mean-value system can close.
double exchange_v_slope(const ExchangeLaw& law, double u) {
  if (const auto* neq = std::get_if<NonEquilibriumLaw>(&law)) return neq->c1 * u + neq->c2;
  if (const auto* cut = std::get_if<CutoffNonEquilibriumLaw>(&law))
    return cut->c1 * eval_eta(cut->cutoff, u) + cut->c2;
  throw ConditionViolatedError("exchange law is not affine in v at constant bulk density");
}

// With an affine exchange law and scalar bulk density, the mean-free v and
// theta equations close mode by mode:
//   v^ = 2 lam phi^ / (4 lam + delta c),  theta^ = -2 c phi^ / (4 lam + delta c),
// which leaves one reduced equation for phi alone,
//   0 = [eps lam - 4/eps + c/(4 lam + delta c)] phi^ + (4/eps) P((phi+m)^3)^.
double reduced_symbol(double lam, double eps, double delta, double c) {
  return eps * lam - 4.0 / eps + c / (4.0 * lam + delta * c);
}

SurfaceField reduced_residual(const SurfaceField& phi, double eps, double delta, double c,
                              double phi_mean) {
  const TorusGeometry& g = phi.geometry();
  const int n = g.n;
  const std::vector<double>& pv = phi.values();
  std::vector<double> cube(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double s = pv[i] + phi_mean;
    cube[i] = s * s * s;
  }
  std::vector<cplx> ch(pv.size());
  fft2_forward(n, cube.data(), ch.data());
  dealias_cubic_inplace(g, ch);
  const std::vector<cplx>& ph = phi.coeffs();
  std::vector<cplx> out(ph.size());
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        out[idx] = 0.0;
        continue;
      }
      out[idx] = reduced_symbol(g.lambda(i1, i2), eps, delta, c) * ph[idx] + 4.0 / eps * ch[idx];
    }
  }
  return SurfaceField::from_coeffs(g, std::move(out));
}

void reduced_jacobian_apply(const TorusGeometry& g, double eps, double delta, double c,
                            const std::vector<double>& gw, const std::vector<double>& w,
                            std::vector<double>& out, std::vector<cplx>& sa, std::vector<cplx>& sb,
                            std::vector<double>& sg) {
  const int n = g.n;
  fft2_forward(n, w.data(), sa.data());
  for (std::size_t i = 0; i < w.size(); ++i) sg[i] = gw[i] * w[i];
  fft2_forward(n, sg.data(), sb.data());
  dealias_cubic_inplace(g, sb);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        sa[idx] = 0.0;
        continue;
      }
      sa[idx] = reduced_symbol(g.lambda(i1, i2), eps, delta, c) * sa[idx] + 12.0 / eps * sb[idx];
    }
  }
  fft2_backward(n, sa.data(), out.data());
}

// J w = eps (-Lap) w + (12/eps) P dealias(gw . w) with gw = (phi + phi_mean)^2
// frozen on the grid; in and out are grid vectors.
void jacobian_apply(const TorusGeometry& g, double eps, const std::vector<double>& gw,
                    const std::vector<double>& w, std::vector<double>& out,
                    std::vector<cplx>& sa, std::vector<cplx>& sb, std::vector<double>& sg) {
  const int n = g.n;
  fft2_forward(n, w.data(), sa.data());
  for (std::size_t i = 0; i < w.size(); ++i) sg[i] = gw[i] * w[i];
  fft2_forward(n, sg.data(), sb.data());
  dealias_cubic_inplace(g, sb);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        sa[idx] = 0.0;
        continue;
      }
      sa[idx] = eps * g.lambda(i1, i2) * sa[idx] + 12.0 / eps * sb[idx];
    }
  }
  fft2_backward(n, sa.data(), out.data());
}

// z = (eps (-Lap) + (12/eps) max gw)^{-1} r, the spectral diagonal
// preconditioner; exact for the stiff Laplacian part and an upper bound for
// the frozen-coefficient potential.
void precond_apply(const TorusGeometry& g, double shift, double eps, const std::vector<double>& r,
                   std::vector<double>& z, std::vector<cplx>& sa) {
  const int n = g.n;
  fft2_forward(n, r.data(), sa.data());
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        sa[idx] = 0.0;
        continue;
      }
      sa[idx] /= eps * g.lambda(i1, i2) + shift;
    }
  }
  fft2_backward(n, sa.data(), z.data());
}

// Preconditioned conjugate gradients for J x = rhs on the mean-free
// subspace (J is symmetric positive definite there). The requested
// tolerance can sit below the round-off floor of the residual recurrence;
// iterating past that floor destroys conjugacy and blows up the iterate,
// so track the best iterate seen and stop once progress stalls.
std::vector<double> pcg_solve(const TorusGeometry& g, double eps, const std::vector<double>& gw,
                              const std::vector<double>& rhs, double rtol, int max_iter) {
  const std::size_t sz = rhs.size();
  std::vector<double> x(sz, 0.0), r = rhs, z(sz), p(sz), jp(sz), sg(sz);
  std::vector<cplx> sa(sz), sb(sz);
  double gmax = 0.0;
  for (double v : gw) gmax = std::max(gmax, v);
  const double shift = 12.0 / eps * gmax;
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return x;
  precond_apply(g, shift, eps, r, z, sa);
  p = z;
  double rz = dot(r, z);
  std::vector<double> x_best = x;
  double best = rhs_norm;
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    jacobian_apply(g, eps, gw, p, jp, sa, sb, sg);
    const double pjp = dot(p, jp);
    if (!(pjp > 0.0)) break;
    const double step = rz / pjp;
    for (std::size_t i = 0; i < sz; ++i) {
      x[i] += step * p[i];
      r[i] -= step * jp[i];
    }
    const double rn = std::sqrt(dot(r, r));
    if (rn < best) {
      best = rn;
      x_best = x;
      stalled = 0;
    } else if (++stalled >= 8 || rn > 10.0 * best) {
      break;
    }
    if (rn <= rtol * rhs_norm) break;
    precond_apply(g, shift, eps, r, z, sa);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < sz; ++i) p[i] = z[i] + beta * p[i];
  }
  // Transform round-off injects a tiny mean over many iterations; remove it
  // so Newton iterates stay on the mean-free subspace.
  double xbar = 0.0;
  for (double v : x_best) xbar += v;
  xbar /= static_cast<double>(sz);
  for (double& v : x_best) v -= xbar;
  return x_best;
}

// PCG on the reduced Jacobian restricted to the orthogonal complement of
// the translation tangents. Equivariance makes the Jacobian exactly
// singular along the tangents at a solution; on the deflated subspace it
// is positive definite near stable patterns. Same best-iterate and stall
// safeguards as the sweep solver.
std::vector<double> deflated_pcg_solve(const TorusGeometry& g, double eps, double delta, double c,
                                       const std::vector<double>& gw,
                                       const std::vector<std::vector<double>>& basis,
                                       const std::vector<double>& rhs, double rtol, int max_iter) {
  const std::size_t sz = rhs.size();
  std::vector<double> x(sz, 0.0), r = rhs, z(sz), p(sz), jp(sz), sg(sz);
  std::vector<cplx> sa(sz), sb(sz);
  double gmax = 0.0;
  for (double v : gw) gmax = std::max(gmax, v);
  const double shift = 12.0 / eps * gmax + 4.0 / eps;
  project_off(basis, r);
  const double rhs_norm = std::sqrt(dot(r, r));
  if (rhs_norm == 0.0) return x;
  precond_apply(g, shift, eps, r, z, sa);
  project_off(basis, z);
  double rz = dot(r, z);
  p = z;
  std::vector<double> x_best = x;
  double best = rhs_norm;
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    reduced_jacobian_apply(g, eps, delta, c, gw, p, jp, sa, sb, sg);
    project_off(basis, jp);
    const double pjp = dot(p, jp);
    if (!(pjp > 0.0)) break;
    const double step = rz / pjp;
    for (std::size_t i = 0; i < sz; ++i) {
      x[i] += step * p[i];
      r[i] -= step * jp[i];
    }
    const double rn = std::sqrt(dot(r, r));
    if (rn < best) {
      best = rn;
      x_best = x;
      stalled = 0;
    } else if (++stalled >= 8 || rn > 10.0 * best) {
      break;
    }
    if (rn <= rtol * rhs_norm) break;
    precond_apply(g, shift, eps, r, z, sa);
    project_off(basis, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < sz; ++i) p[i] = z[i] + beta * p[i];
  }
  double xbar = 0.0;
  for (double v : x_best) xbar += v;
  xbar /= static_cast<double>(sz);
  for (double& v : x_best) v -= xbar;
  return x_best;
}

// Exact translation of a band-limited field by (a1, a2), done as a per-mode
// phase factor. Grid shifts commute with every operator in the residual map;
// fractional shifts are needed because the cubic term's spectral wrap-around
// pins the phase of stationary patterns between grid points.
SurfaceField translate_field(const SurfaceField& f, double a1, double a2) {
  const TorusGeometry& g = f.geometry();
  const int n = g.n;
  std::vector<cplx> out = f.coeffs();
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      const double ph = g.wavenumber(i1) * a1 + g.wavenumber(i2) * a2;
      out[idx] *= cplx(std::cos(ph), std::sin(ph));
    }
  }
  return SurfaceField::from_coeffs(g, std::move(out));
}

// Iterate of the finishing Newton stage: the field, its reduced-equation
// residual, and the sup norm of that residual.
struct PolishState {
  SurfaceField phi;
  SurfaceField res;
  double rn = 0.0;
};

PolishState make_polish_state(SurfaceField phi, double eps, double delta, double c, double m_bar) {
  SurfaceField res = reduced_residual(phi, eps, delta, c, m_bar);
  const double rn = max_abs(res);
  return PolishState{std::move(phi), std::move(res), rn};
}

// One Newton step restricted transverse to the translation orbit: solve the
// deflated system J d0 = res and backtrack on the sup norm of the residual.
// Returns false if no step length makes progress.
bool polish_transverse_step(PolishState& st, double eps, double delta, double c, double m_bar) {
  const TorusGeometry& g = st.phi.geometry();
  const std::size_t sz = st.phi.values().size();
  const std::vector<double>& pv = st.phi.values();
  std::vector<double> gw(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    const double s = pv[i] + m_bar;
    gw[i] = s * s;
  }
  const std::vector<std::vector<double>> basis = translation_basis(st.phi);
  const double rtol = std::clamp(0.1 * st.rn, 1e-12, 1e-2);
  const SurfaceField d0 = SurfaceField::from_values(
      g, deflated_pcg_solve(g, eps, delta, c, gw, basis, st.res.values(), rtol, 600));
  double step = 1.0;
  for (int cut = 0; cut < 25; ++cut) {
    SurfaceField cand = add_scaled(st.phi, -step, d0);
    SurfaceField cres = reduced_residual(cand, eps, delta, c, m_bar);
    const double cn = max_abs(cres);
    if (std::isfinite(cn) && cn < st.rn) {
      st.phi = std::move(cand);
      st.res = std::move(cres);
      st.rn = cn;
      return true;
    }
    step *= 0.5;
  }
  return false;
}

// Drive the iterate onto the slice transverse to the translation orbit: a few
// transverse Newton steps, stopping once they no longer shrink the residual
// substantially (what remains is then the tangential pinning force).
void polish_slice_drop(PolishState& st, double eps, double delta, double c, double m_bar) {
  for (int pass = 0; pass < 5; ++pass) {
    const double before = st.rn;
    if (!polish_transverse_step(st, eps, delta, c, m_bar)) return;
    if (st.rn > 0.5 * before) return;
  }
}

// Full Newton step by exact block elimination. With P the projector off the
// tangents t_i = d(phi)/dx_i and J the reduced Jacobian, solve
//   d0  = (PJP)^+ P res,      y_i = (PJP)^+ P J t_i,
//   (T - S) a = b - w,        T_ij = <t_i, J t_j>,  S_ij = <J t_i, y_j>,
//                             b_i  = <t_i, res>,    w_i  = <J t_i, d0>,
// so the full-space Newton direction is d0 - sum_i a_i y_i plus a_i t_i along
// the orbit. The tangential part is applied as an exact translation by -a:
// a linear tangent move of that size would leave the curved orbit by far more
// than the residual being corrected. The wrap-around coupling makes J t_i
// point mostly off the orbit, so the transverse compensation y_i is what lets
// a phase move survive the line search. Returns whether a step was accepted
// and the accepted step length (1 means the unit Newton step).
std::pair<bool, double> polish_full_step(PolishState& st, double eps, double delta, double c,
                                         double m_bar) {
  const TorusGeometry& g = st.phi.geometry();
  const std::size_t sz = st.phi.values().size();
  const double cell = g.length / g.n;
  std::vector<double> sg(sz);
  std::vector<cplx> sa(sz), sb(sz);

  const std::vector<double>& pv = st.phi.values();
  std::vector<double> gw(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    const double s = pv[i] + m_bar;
    gw[i] = s * s;
  }
  const std::vector<std::vector<double>> basis = translation_basis(st.phi);
  const double rtol = std::clamp(0.1 * st.rn, 1e-12, 1e-2);
  const SurfaceField d0 = SurfaceField::from_values(
      g, deflated_pcg_solve(g, eps, delta, c, gw, basis, st.res.values(), rtol, 600));

  // Raw tangents along directions where the pattern actually varies.
  std::vector<std::vector<double>> tang;
  std::vector<int> dirs;
  const double tiny =
      static_cast<double>(sz) * 1e-24 * (1.0 + max_abs(st.phi)) * (1.0 + max_abs(st.phi));
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> t = spectral_derivative(st.phi, dir).values();
    if (dot(t, t) > tiny) {
      tang.push_back(std::move(t));
      dirs.push_back(dir);
    }
  }
  const std::size_t k = tang.size();
  std::vector<std::vector<double>> jt(k, std::vector<double>(sz));
  std::vector<std::vector<double>> y(k);
  double tm[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double rhs2[2] = {0.0, 0.0};
  for (std::size_t j = 0; j < k; ++j) {
    reduced_jacobian_apply(g, eps, delta, c, gw, tang[j], jt[j], sa, sb, sg);
    y[j] = deflated_pcg_solve(g, eps, delta, c, gw, basis, jt[j], rtol, 600);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) tm[i][j] = dot(tang[i], jt[j]) - dot(jt[i], y[j]);
    rhs2[i] = dot(tang[i], st.res.values()) - dot(jt[i], d0.values());
  }

  // Schur-complement solve for the phase shift, with a mild Tikhonov term to
  // stay usable near inflection points of the pinning potential and a cap at
  // a fraction of the grid cell; the line search does the rest.
  double shift[2] = {0.0, 0.0};
  if (k > 0) {
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) scale = std::max(scale, std::abs(tm[i][j]));
    if (scale > 0.0) {
      const double mu = 1e-3 * scale;
      double a0 = 0.0, a1 = 0.0;
      if (k == 1) {
        a0 = rhs2[0] / (tm[0][0] + (tm[0][0] >= 0.0 ? mu : -mu));
      } else {
        const double axx = tm[0][0] + (tm[0][0] >= 0.0 ? mu : -mu);
        const double ayy = tm[1][1] + (tm[1][1] >= 0.0 ? mu : -mu);
        const double axy = 0.5 * (tm[0][1] + tm[1][0]);
        const double det = axx * ayy - axy * axy;
        if (std::abs(det) > 1e-12 * scale * scale) {
          a0 = (ayy * rhs2[0] - axy * rhs2[1]) / det;
          a1 = (axx * rhs2[1] - axy * rhs2[0]) / det;
        }
      }
      const double amp = std::max(std::abs(a0), std::abs(a1));
      if (amp > 0.35 * cell) {
        a0 *= 0.35 * cell / amp;
        a1 *= 0.35 * cell / amp;
      }
      shift[dirs[0]] = a0;
      if (k == 2) shift[dirs[1]] = a1;
    }
  }

  bool with_phase = shift[0] != 0.0 || shift[1] != 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    double step = 1.0;
    for (int cut = 0; cut < 30; ++cut) {
      SurfaceField cand = add_scaled(st.phi, -step, d0);
      if (with_phase) {
        std::vector<double>& cv = cand.mutable_values();
        for (std::size_t j = 0; j < k; ++j) {
          const double aj = shift[dirs[j]];
          if (aj == 0.0) continue;
          for (std::size_t i = 0; i < sz; ++i) cv[i] += step * aj * y[j][i];
        }
        cand = translate_field(cand, -step * shift[0], -step * shift[1]);
      }
      SurfaceField cres = reduced_residual(cand, eps, delta, c, m_bar);
      const double cn = max_abs(cres);
      if (std::isfinite(cn) && cn < st.rn) {
        st.phi = std::move(cand);
        st.res = std::move(cres);
        st.rn = cn;
        return {true, step};
      }
      step *= 0.5;
    }
    if (!with_phase) break;
    // Retry transverse-only in case the tangential block was misleading.
    with_phase = false;
  }
  return {false, 0.0};
}

// Global phase search. The pinning force along the orbit is periodic in the
// grid cell, so when the Newton basin around a force zero does not contain
// the current phase, sample candidate phases across one cell, drop each onto
// the transverse slice, and adopt the best. refine=0 scans the whole cell;
// refine=1 scans a neighborhood of the current phase at finer spacing.
// Returns true if a better iterate was found.
bool polish_phase_scan(PolishState& st, int refine, double eps, double delta, double c,
                       double m_bar) {
  const TorusGeometry& g = st.phi.geometry();
  const double cell = g.length / g.n;
  const std::size_t sz = st.phi.values().size();
  const double tiny =
      static_cast<double>(sz) * 1e-24 * (1.0 + max_abs(st.phi)) * (1.0 + max_abs(st.phi));
  bool active[2] = {false, false};
  for (int dir = 0; dir < 2; ++dir) {
    const std::vector<double> t = spectral_derivative(st.phi, dir).values();
    active[dir] = dot(t, t) > tiny;
  }
  if (!active[0] && !active[1]) return false;

  const int samples = 5;
  const double spacing = refine == 0 ? cell / samples : cell / 25.0;
  const double base = refine == 0 ? 0.0 : -2.0 * spacing;
  PolishState best = st;
  bool improved = false;
  const int n1 = active[0] ? samples : 1;
  const int n2 = active[1] ? samples : 1;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double a1 = active[0] ? base + i * spacing : 0.0;
      const double a2 = active[1] ? base + j * spacing : 0.0;
      if (a1 == 0.0 && a2 == 0.0) continue;
      PolishState cand =
          make_polish_state(translate_field(st.phi, a1, a2), eps, delta, c, m_bar);
      polish_slice_drop(cand, eps, delta, c, m_bar);
      if (cand.rn < best.rn) {
        best = std::move(cand);
        improved = true;
      }
    }
  }
  if (improved) st = std::move(best);
  return improved;
}

// Finishing Newton stage on the reduced equation. The damped sweep map is
// nearly neutral along translations, so it stalls at a small residual carried
// almost entirely by the two translation modes. Stationary states are isolated
// up to grid shifts: the masked cubic term breaks continuous translation
// symmetry through its spectral wrap-around, which acts as a weak grid-periodic
// pinning force along the orbit. Full Newton steps handle the transverse part
// and small phase corrections; when the nearest pinning-force zero lies outside
// the Newton basin, a phase scan across the grid cell relocates the iterate
// before Newton resumes.
SurfaceField polish_stationary(SurfaceField phi, double eps, double delta, double c, double m_bar,
                               double tol, std::vector<double>& history, int max_steps) {
  PolishState st = make_polish_state(std::move(phi), eps, delta, c, m_bar);
  int scans = 0;
  for (int it = 0; it < max_steps; ++it) {
    if (!std::isfinite(st.rn))
      throw NonConvergenceError("fixed_point_iterate: polish residual is not finite", history);
    if (st.rn <= tol) return st.phi;
    history.push_back(st.rn);

    const double prev = st.rn;
    const auto [accepted, step] = polish_full_step(st, eps, delta, c, m_bar);
    if (st.rn <= tol) continue;
    if (accepted && st.rn < 0.5 * prev) continue;

    // Stuck or creeping: the phase is outside the Newton basin of any
    // pinning-force zero. Search the cell, then a finer neighborhood.
    if (scans < 2) {
      ++scans;
      if (polish_phase_scan(st, scans - 1, eps, delta, c, m_bar)) continue;
    }
    if (!accepted) {
      history.push_back(st.rn);
      throw NonConvergenceError("fixed_point_iterate: polish line search made no progress",
                                history);
    }
  }
  history.push_back(st.rn);
  throw NonConvergenceError("fixed_point_iterate: polish iteration cap exceeded", history);
}

}  // namespace

double StationaryResiduals::max() const {
  return std::max({mu, v_equation, constitutive, q_mean, mass});
}

void StationaryConfig::validate() const {
  p.validate();
  raftsim::validate(law);
  if (!(bulk_volume > 0.0)) throw ConfigError("bulk volume must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("residual tolerance must be positive");
  if (max_iters < 1) throw ConfigError("iteration cap must be at least 1");
  if (!std::isfinite(m) || !std::isfinite(M)) throw ConfigError("masses must be finite");
}

std::pair<double, double> mean_value_solve(const ExchangeLaw& law, const SurfaceField& v_tilde,
                                           double M, double bulk_volume, double surface_area) {
  validate(law);
  if (!(bulk_volume > 0.0)) throw ConfigError("bulk volume must be positive");
  if (!(surface_area > 0.0)) throw ConfigError("surface area must be positive");
  if (!std::isfinite(M)) throw ConfigError("combined mass must be finite");
  require_mean_free(v_tilde, "v_tilde");
  if (std::holds_alternative<EquilibriumLaw>(law))
    throw ConditionViolatedError(
        "mean_value_solve: the equilibrium exchange rate is set by theta, not by (u, v), "
        "so the mean-value system is not closed in these variables");
  if (M < 0.0)
    throw ConditionViolatedError("mean_value_solve: no root in [0, M/|B|] for negative mass");

  if (const auto* neq = std::get_if<NonEquilibriumLaw>(&law)) {
    const double u = u_fixed_point(neq->c1, neq->c2, M, bulk_volume, surface_area);
    const double v_mean = neq->c1 * u / (neq->c1 * u + neq->c2);
    return {u, v_mean};
  }

  // Remaining laws: eliminate v_mean = (M - |B| u)/|G| through the mass
  // constraint and bisect int_G q(u, v_tilde + v_mean(u)) over [0, M/|B|].
  if (M == 0.0) return {0.0, 0.0};
  const TorusGeometry& g = v_tilde.geometry();
  const SurfaceField theta = SurfaceField::constant(g, 0.0);
  const auto q_mean_at = [&](double u) {
    const double v_mean = (M - bulk_volume * u) / surface_area;
    const SurfaceField v_full = add(v_tilde, SurfaceField::constant(g, v_mean));
    return q_surface_integral(law, u, v_full, theta);
  };
  double a = 0.0;
  double b = M / bulk_volume;
  double ga = q_mean_at(a);
  const double gb = q_mean_at(b);
  if (ga == 0.0) return {a, M / surface_area};
  if (gb == 0.0) return {b, 0.0};
  if ((ga < 0.0) == (gb < 0.0))
    throw ConditionViolatedError("mean_value_solve: int_G q has no sign change over [0, M/|B|]");
  const double span = b;
  for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, span); ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = q_mean_at(mid);
    if (gm == 0.0) {
      a = mid;
      b = mid;
      break;
    }
    if ((gm < 0.0) == (ga < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  const double u = 0.5 * (a + b);
  return {u, (M - bulk_volume * u) / surface_area};
}

SurfaceField newton_semilinear(const SurfaceField& f, double eps, double tol, double phi_mean,
                               const SurfaceField* init, int max_iters) {
  if (!(eps >= 1e-8)) throw ConfigError("eps must be at least 1e-8");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iters < 1) throw ConfigError("iteration cap must be at least 1");
  if (!std::isfinite(phi_mean)) throw ConfigError("phi_mean must be finite");
  if (f.geometry().n <= 0) throw ConfigError("right-hand side must carry a grid");
  if (!f.finite()) throw ConfigError("right-hand side must be finite");
  if (std::abs(f.mean()) > 1e-11 * (1.0 + max_abs(f)))
    throw SingularSystemError("newton_semilinear: right-hand side must be mean-free");

  const TorusGeometry& g = f.geometry();
  SurfaceField phi =
      init ? mean_free_project(*init) : SurfaceField::constant(g, 0.0);
  if (!phi.finite()) throw ConfigError("initial guess must be finite");

  std::vector<double> history;
  SurfaceField res = sub(f, monotone_apply(phi, eps, phi_mean));
  double rn = max_abs(res);
  const double f_scale = 1.0 + max_abs(f);
  for (int it = 0; it < max_iters; ++it) {
    if (!std::isfinite(rn))
      throw NonConvergenceError("newton_semilinear: residual is not finite", history);
    if (rn <= tol) return mean_free_project(phi);
    history.push_back(rn);

    const std::vector<double>& pv = phi.values();
    std::vector<double> gw(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double s = pv[i] + phi_mean;
      gw[i] = s * s;
    }
    const double rtol = std::clamp(0.1 * rn / f_scale, 1e-12, 1e-2);
    SurfaceField dphi =
        SurfaceField::from_values(g, pcg_solve(g, eps, gw, res.values(), rtol, 600));

    bool accepted = false;
    double step = 1.0;
    for (int cut = 0; cut < 40; ++cut) {
      const SurfaceField cand = add_scaled(phi, step, dphi);
      SurfaceField cres = sub(f, monotone_apply(cand, eps, phi_mean));
      const double cn = max_abs(cres);
      if (std::isfinite(cn) && cn < rn) {
        phi = cand;
        res = std::move(cres);
        rn = cn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      history.push_back(rn);
      throw NonConvergenceError("newton_semilinear: line search made no progress", history);
    }
  }
  history.push_back(rn);
  throw NonConvergenceError("newton_semilinear: iteration cap exceeded", history);
}

StationarySolution fixed_point_iterate(const StationaryConfig& cfg, const SurfaceField& init_v,
                                       const SurfaceField* init_phi) {
  cfg.validate();
  require_mean_free(init_v, "initial v");
  const TorusGeometry& g = init_v.geometry();
  const double area = g.area();
  const double m_bar = cfg.m / area;
  const double eps = cfg.p.eps;
  const double delta = cfg.p.delta;

  SurfaceField v = dealias_cubic(mean_free_project(init_v));
  SurfaceField phi_lag;
  if (init_phi) {
    require_mean_free(*init_phi, "initial phi");
    phi_lag = dealias_cubic(mean_free_project(*init_phi));
  } else {
    phi_lag = SurfaceField::constant(g, 0.0);
  }
  SurfaceField theta = SurfaceField::constant(g, 0.0);

  const double newton_tol = std::max(0.1 * cfg.tol, 1e-13);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.max_iters));
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const auto [u, v_mean] = mean_value_solve(cfg.law, v, cfg.M, cfg.bulk_volume, area);
    const double theta_mean = 2.0 / delta * (2.0 * v_mean - 1.0 - m_bar);
    const SurfaceField v_full = add(v, SurfaceField::constant(g, v_mean));
    const SurfaceField theta_full = add(theta, SurfaceField::constant(g, theta_mean));
    const SurfaceField q = eval_q(cfg.law, u, v_full, theta_full);
    theta = solve_surface_helmholtz(0.0, 1.0, mean_free_project(q));

    const SurfaceField f = add_scaled(scale(phi_lag, 4.0 / eps), 0.5, theta);
    SurfaceField phi = newton_semilinear(f, eps, newton_tol, m_bar, &phi_lag);
    phi = add(phi_lag, remove_translation_drift(sub(phi, phi_lag), phi_lag));

    const SurfaceField v_target = add_scaled(scale(theta, 0.25 * delta), 0.5, phi);
    v = add_scaled(scale(v, 1.0 - cfg.alpha), cfg.alpha, v_target);
    phi_lag = phi;

    StationarySolution sol;
    sol.phi = phi;
    sol.v = v;
    sol.theta = theta;
    sol.u_mean = u;
    sol.v_mean = v_mean;
    sol.iterations = it;
    sol.residuals = stationary_residuals(sol, cfg);
    const double worst = sol.residuals.max();
    history.push_back(worst);
    if (!std::isfinite(worst))
      throw NonConvergenceError("fixed_point_iterate: residual is not finite", history);
    if (worst < cfg.tol) return sol;

    // Sweep progress stalls once the residual is dominated by inner solver
    // slack amplified along the translation family; finish with deflated
    // Newton steps on the reduced equation.
    const int budget = cfg.max_iters - it;
    if (it >= 6 && budget >= 2 && worst < 1e-5 && worst > 0.90 * history[history.size() - 4]) {
      const double c = exchange_v_slope(cfg.law, u);
      sol.phi = polish_stationary(phi, eps, delta, c, m_bar, 0.3 * cfg.tol, history,
                                  budget > 30 ? 30 : budget);
      const int n = g.n;
      const std::vector<cplx>& ph = sol.phi.coeffs();
      std::vector<cplx> vh(ph.size());
      std::vector<cplx> th(ph.size());
      for (int i2 = 0; i2 < n; ++i2) {
        for (int i1 = 0; i1 < n; ++i1) {
          const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
          if (i1 == 0 && i2 == 0) {
            vh[idx] = 0.0;
            th[idx] = 0.0;
            continue;
          }
          const double lam = g.lambda(i1, i2);
          vh[idx] = 2.0 * lam / (4.0 * lam + delta * c) * ph[idx];
          th[idx] = -2.0 * c / (4.0 * lam + delta * c) * ph[idx];
        }
      }
      sol.v = SurfaceField::from_coeffs(g, std::move(vh));
      sol.theta = SurfaceField::from_coeffs(g, std::move(th));
      sol.iterations = static_cast<int>(history.size());
      sol.residuals = stationary_residuals(sol, cfg);
      const double polished = sol.residuals.max();
      history.push_back(polished);
      if (!std::isfinite(polished))
        throw NonConvergenceError("fixed_point_iterate: residual is not finite", history);
      if (polished < cfg.tol) return sol;
      throw NonConvergenceError("fixed_point_iterate: residual floor above tolerance", history);
    }
  }
  throw NonConvergenceError("fixed_point_iterate: iteration cap exceeded", history);
}

StationaryResiduals stationary_residuals(const StationarySolution& sol,
                                         const StationaryConfig& cfg) {
  cfg.validate();
  const TorusGeometry& g = sol.phi.geometry();
  if (g.n <= 0) throw ConfigError("solution must carry a grid");
  if (sol.v.geometry() != g || sol.theta.geometry() != g)
    throw ConfigError("solution fields must share one grid");
  const int n = g.n;
  const double area = g.area();
  const double m_bar = cfg.m / area;
  const double eps = cfg.p.eps;
  const double delta = cfg.p.delta;
  const double theta_mean = 2.0 / delta * (2.0 * sol.v_mean - 1.0 - m_bar);

  const SurfaceField phi_full = add(sol.phi, SurfaceField::constant(g, m_bar));
  const SurfaceField v_full = add(sol.v, SurfaceField::constant(g, sol.v_mean));
  const SurfaceField theta_full = add(sol.theta, SurfaceField::constant(g, theta_mean));

  StationaryResiduals r;

  const SurfaceField w = detail::dealiased_wprime(phi_full);
  const std::vector<cplx>& ph = sol.phi.coeffs();
  const std::vector<cplx>& wh = w.coeffs();
  const std::vector<cplx>& th = sol.theta.coeffs();
  std::vector<cplx> mu(ph.size());
  std::vector<cplx> veq(ph.size());
  const SurfaceField q = eval_q(cfg.law, sol.u_mean, v_full, theta_full);
  const std::vector<cplx>& qh = q.coeffs();
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t idx = static_cast<std::size_t>(i2) * n + i1;
      if (i1 == 0 && i2 == 0) {
        mu[idx] = 0.0;
        veq[idx] = 0.0;
        continue;
      }
      const double lam = g.lambda(i1, i2);
      mu[idx] = eps * lam * ph[idx] + wh[idx] / eps - 0.5 * th[idx];
      veq[idx] = -lam * th[idx] + qh[idx];
    }
  }
  r.mu = max_abs(SurfaceField::from_coeffs(g, std::move(mu)));
  r.v_equation = max_abs(SurfaceField::from_coeffs(g, std::move(veq)));

  const std::vector<double>& tv = sol.theta.values();
  const std::vector<double>& vv = sol.v.values();
  const std::vector<double>& pv = sol.phi.values();
  double constit = 0.0;
  for (std::size_t i = 0; i < tv.size(); ++i)
    constit = std::max(constit, std::abs(tv[i] - 2.0 / delta * (2.0 * vv[i] - pv[i])));
  r.constitutive = constit;

  r.q_mean = std::abs(surface_integral(q));
  r.mass = std::abs(cfg.bulk_volume * sol.u_mean + area * sol.v_mean - cfg.M);
  return r;
}

ReducedState as_reduced_state(const StationarySolution& sol, const StationaryConfig& cfg) {
  cfg.validate();
  const TorusGeometry& g = sol.phi.geometry();
  if (g.n <= 0) throw ConfigError("solution must carry a grid");
  ReducedState st;
  st.t = 0.0;
  st.u = sol.u_mean;
  st.phi = add(sol.phi, SurfaceField::constant(g, cfg.m / g.area()));
  st.v = add(sol.v, SurfaceField::constant(g, sol.v_mean));
  st.bulk_volume = cfg.bulk_volume;
  return st;
}

}  // namespace raftsim
