#include "raftsim/exchange.hpp"

#include <cmath>

#include "raftsim/spectral.hpp"

namespace raftsim {

double CutoffFunction::operator()(double s) const {
  const double as = std::abs(s);
  if (as <= a) return s;
  const double sign = (s > 0.0) ? 1.0 : -1.0;
  return sign * (a + w * std::tanh((as - a) / w));
}

double eval_eta(const CutoffFunction& cf, double s) { return cf(s); }

void validate(const ExchangeLaw& law) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, EquilibriumLaw>) {
          if (!(l.c >= 0.0)) throw ConfigError("equilibrium exchange rate must be >= 0");
        } else if constexpr (std::is_same_v<T, NonEquilibriumLaw>) {
          if (!(l.c1 > 0.0) || !(l.c2 > 0.0))
            throw ConfigError("non-equilibrium exchange rates must be positive");
        } else {
          if (!(l.c1 > 0.0) || !(l.c2 > 0.0))
            throw ConfigError("non-equilibrium exchange rates must be positive");
          if (!(l.cutoff.a >= 0.0) || !(l.cutoff.w > 0.0))
            throw ConfigError("cutoff parameters must satisfy a >= 0, w > 0");
        }
      },
      law);
}

namespace {

std::vector<double> q_grid(const ExchangeLaw& law, const SurfaceField& u_trace,
                           const SurfaceField& v, const SurfaceField& theta) {
  if (!(u_trace.geometry() == v.geometry()))
    throw ConfigError("exchange arguments live on different grids");
  const std::vector<double>& uv = u_trace.values();
  const std::vector<double>& vv = v.values();
  std::vector<double> q(uv.size());
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, EquilibriumLaw>) {
          if (!(theta.geometry() == v.geometry()))
            throw ConfigError("exchange arguments live on different grids");
          const std::vector<double>& tv = theta.values();
          for (std::size_t i = 0; i < q.size(); ++i) q[i] = -l.c * (tv[i] - uv[i]);
        } else if constexpr (std::is_same_v<T, NonEquilibriumLaw>) {
          for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = l.c1 * uv[i] * (1.0 - vv[i]) - l.c2 * vv[i];
        } else {
          for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = l.c1 * uv[i] - l.c1 * l.cutoff(uv[i]) * vv[i] - l.c2 * vv[i];
        }
      },
      law);
  return q;
}

}  // namespace

SurfaceField eval_q(const ExchangeLaw& law, const SurfaceField& u_trace, const SurfaceField& v,
                    const SurfaceField& theta) {
  SurfaceField q = SurfaceField::from_values(v.geometry(), q_grid(law, u_trace, v, theta));
  return dealias_cubic(q);
}

double q_surface_integral(const ExchangeLaw& law, const SurfaceField& u_trace,
                          const SurfaceField& v, const SurfaceField& theta) {
  // The zero mode is unaffected by dealiasing, so integrate the raw grid.
  std::vector<double> q = q_grid(law, u_trace, v, theta);
  double s = 0.0;
  for (double x : q) s += x;
  return s * v.geometry().area() / static_cast<double>(q.size());
}

SurfaceField eval_q(const ExchangeLaw& law, double u_const, const SurfaceField& v,
                    const SurfaceField& theta) {
  return eval_q(law, SurfaceField::constant(v.geometry(), u_const), v, theta);
}

double q_surface_integral(const ExchangeLaw& law, double u_const, const SurfaceField& v,
                          const SurfaceField& theta) {
  return q_surface_integral(law, SurfaceField::constant(v.geometry(), u_const), v, theta);
}

}  // namespace raftsim
