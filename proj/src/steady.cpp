#include "svpi/steady.hpp"

#include <cmath>
#include <string>

#include "svpi/errors.hpp"
#include "svpi/numerics.hpp"

namespace svpi {

double steady_rhs(const ChannelConfig& cfg, double H, double x, double Q) {
  if (!(H > 0.0)) {
    throw RegimeError("steady_rhs: non-positive height", x);
  }
  const double r = Q * Q / (H * H * H);
  const double den = cfg.g - r;
  if (!(den > 0.0)) {
    throw RegimeError("steady_rhs: critical or supercritical flow (g H^3 <= Q^2)", x);
  }
  return (slope_at(cfg, x) - cfg.k * r) / den;
}

Profile solve_steady(const ChannelConfig& cfg, double Q, double H_c,
                     const Grid& grid) {
  if (!(Q > 0.0)) throw DomainError("solve_steady: Q must be positive");
  if (!(H_c > 0.0)) throw DomainError("solve_steady: H_c must be positive");
  if (std::abs(grid.L - cfg.L) > 1e-12 * cfg.L) {
    throw DomainError("solve_steady: grid length differs from channel length");
  }
  const int n = grid.n;
  Field H(n);
  H(n - 1) = H_c;
  const double h = -grid.dx;
  auto f = [&](double Hs, double xs) {
    if (!(Hs > 0.0) || Hs > cfg.h_max) {
      throw RegimeError("solve_steady: height left (0, h_max)", xs);
    }
    return steady_rhs(cfg, Hs, std::clamp(xs, 0.0, cfg.L), Q);
  };
  for (int i = n - 1; i > 0; --i) {
    const double x = grid.x(i);
    const double xm = 0.5 * (x + grid.x(i - 1));
    const double xe = grid.x(i - 1);
    const double y = H(i);
    const double k1 = f(y, x);
    const double k2 = f(y + 0.5 * h * k1, xm);
    const double k3 = f(y + 0.5 * h * k2, xm);
    const double k4 = f(y + h * k3, xe);
    H(i - 1) = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(H(i - 1) > 0.0) || H(i - 1) > cfg.h_max) {
      throw RegimeError("solve_steady: height left (0, h_max)", xe);
    }
  }
  Field V = Q / H;
  Profile p(grid, std::move(H), std::move(V), ProfileRole::steady);
  const RegimeReport rep = validate_regime(cfg, p);
  if (!rep.pass) {
    throw RegimeError("solve_steady: profile violates the fluvial regime",
                      grid.x(std::max(rep.worst_node, 0)));
  }
  return p;
}

double steady_residual(const ChannelConfig& cfg, const Profile& p) {
  const double dx = p.grid.dx;
  const Field mass = d_dx(p.H * p.V, dx);
  const Field mom = p.V * d_dx(p.V, dx) + cfg.g * d_dx(p.H, dx) +
                    cfg.k * p.V.square() / p.H - slope_on(cfg, p.grid);
  return std::max(mass.abs().maxCoeff(), mom.abs().maxCoeff());
}

std::vector<Profile> quasi_static_family(const ChannelConfig& cfg,
                                         const InflowSignal& inflow, double H_c,
                                         const Grid& grid,
                                         const std::vector<double>& times) {
  std::vector<Profile> out;
  out.reserve(times.size());
  for (double t : times) {
    try {
      Profile p = solve_steady(cfg, inflow(t), H_c, grid);
      p.role = ProfileRole::quasi_static;
      out.push_back(std::move(p));
    } catch (const RegimeError& e) {
      throw RegimeError(std::string(e.what()) + " (t = " + std::to_string(t) + ")",
                        e.position(), t);
    }
  }
  return out;
}

}  // namespace svpi
