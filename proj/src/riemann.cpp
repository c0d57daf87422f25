#include "svpi/riemann.hpp"

#include <cmath>

#include "svpi/errors.hpp"

namespace svpi {

std::pair<double, double> eigenvalues(double g, double H, double V) {
  if (!(H > 0.0)) throw RegimeError("eigenvalues: non-positive height");
  const double c = std::sqrt(g * H);
  if (!(c > std::abs(V))) {
    throw RegimeError("eigenvalues: flow is not subcritical");
  }
  return {V + c, c - V};
}

RiemannFields coupling_coefficients(const ChannelConfig& cfg,
                                    const Profile& base) {
  const RegimeReport rep = validate_regime(cfg, base);
  if (!rep.pass) {
    throw RegimeError("coupling_coefficients: base violates the fluvial regime",
                      base.grid.x(std::max(rep.worst_node, 0)));
  }
  RiemannFields f;
  f.grid = base.grid;
  f.g = cfg.g;
  f.H1 = base.H;
  f.V1 = base.V;
  const double g = cfg.g;
  const double k = cfg.k;
  f.dH1dx = d_dx(base.H, base.grid.dx);
  f.dV1dx = d_dx(base.V, base.grid.dx);
  const Field c = (g * base.H).sqrt();
  f.lambda1 = base.V + c;
  f.lambda2 = c - base.V;

  const Field a = (g / base.H).sqrt() * f.dH1dx;
  const Field& b = f.dV1dx;
  const Field fr = k * base.V / base.H;
  const Field e = k * base.V.square() / (2.0 * base.H.square()) * (base.H / g).sqrt();
  f.gamma1 = 0.75 * a + 0.75 * b + fr - e;
  f.gamma2 = 0.25 * a + 0.25 * b + fr + e;
  f.delta1 = -0.25 * a + 0.25 * b + fr - e;
  f.delta2 = -0.75 * a + 0.75 * b + fr + e;
  return f;
}

void phi_weights(RiemannFields& f) {
  if (f.grid.n % 2 == 0) {
    throw DomainError("phi_weights: an odd number of nodes is required");
  }
  const double dx = f.grid.dx;
  f.phi1 = cumulative_integral(f.gamma1 / f.lambda1, dx).exp();
  f.phi2 = (-cumulative_integral(f.delta2 / f.lambda2, dx)).exp();
  f.phi = f.phi1 / f.phi2;
}

RiemannFields riemann_fields(const ChannelConfig& cfg, const Profile& base) {
  RiemannFields f = coupling_coefficients(cfg, base);
  phi_weights(f);
  return f;
}

std::pair<Field, Field> to_riemann(const Profile& state, const Profile& base,
                                   double g) {
  if (!state.grid.same_as(base.grid)) {
    throw DomainError("to_riemann: state and base grids differ");
  }
  return to_riemann(state.H - base.H, state.V - base.V, base.H, g);
}

Profile from_riemann(const Field& u1, const Field& u2, const Profile& base,
                     double g) {
  if (u1.size() != base.grid.n || u2.size() != base.grid.n) {
    throw DomainError("from_riemann: size mismatch with base grid");
  }
  auto [h, v] = from_riemann(u1, u2, base.H, g);
  return Profile(base.grid, std::move(h), std::move(v), ProfileRole::state);
}

}  // namespace svpi
