#include "svpi/channel.hpp"

#include <cmath>
#include <string>

#include "svpi/errors.hpp"

namespace svpi {

TabulatedSlope::TabulatedSlope(std::vector<double> xs, std::vector<double> cs)
    : x(std::move(xs)), c(std::move(cs)) {
  if (x.size() < 4) throw DomainError("tabulated slope needs at least 4 nodes");
  spline = CubicSpline(x, c);
}

void ChannelConfig::validate() const {
  if (!(g > 0.0)) throw DomainError("channel: g must be positive");
  if (!(L > 0.0)) throw DomainError("channel: L must be positive");
  if (!(k >= 0.0)) throw DomainError("channel: k must be non-negative");
  if (!(v_g > 0.0)) throw DomainError("channel: v_g must be positive");
  if (!(alpha > 0.0)) throw DomainError("channel: alpha must be positive");
  if (!(h_max > 0.0)) throw DomainError("channel: h_max must be positive");
  if (const auto* t = std::get_if<TabulatedSlope>(&slope)) {
    const double tol = 1e-12 * L;
    if (t->x.size() < 4) throw DomainError("channel: tabulated slope needs >= 4 nodes");
    if (std::abs(t->x.front()) > tol || std::abs(t->x.back() - L) > tol) {
      throw DomainError("channel: tabulated slope must span [0, L]");
    }
  }
}

double slope_at(const ChannelConfig& cfg, double x) {
  const double tol = 1e-12 * cfg.L;
  if (x < -tol || x > cfg.L + tol || std::isnan(x)) {
    throw DomainError("slope_at: x = " + std::to_string(x) + " outside [0, L]");
  }
  return std::visit(
      [x](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSlope>) {
          return s.c0;
        } else if constexpr (std::is_same_v<T, AffineSlope>) {
          return s.c0 + s.c1 * x;
        } else {
          return s.spline(x);
        }
      },
      cfg.slope);
}

Field slope_on(const ChannelConfig& cfg, const Grid& grid) {
  Field c(grid.n);
  for (int i = 0; i < grid.n; ++i) c(i) = slope_at(cfg, grid.x(i));
  return c;
}

double froude_margin(const ChannelConfig& cfg, double H, double V) {
  if (!(H > 0.0)) throw DomainError("froude_margin: H must be positive");
  return cfg.g * H - V * V;
}

RegimeReport validate_regime(const ChannelConfig& cfg, const Profile& p) {
  RegimeReport r;
  const Field margin = cfg.g * p.H - p.V.square() - cfg.alpha;
  Eigen::Index worst = 0;
  r.min_fluvial_margin = margin.minCoeff(&worst);
  r.worst_node = static_cast<int>(worst);
  r.max_height_excess = (p.H - cfg.h_max).maxCoeff();
  r.min_height = p.H.minCoeff();
  r.pass = r.min_height > 0.0 && r.min_fluvial_margin > 0.0 &&
           r.max_height_excess < 0.0 && p.H.allFinite() && p.V.allFinite();
  return r;
}

double min_lambda2(const ChannelConfig& cfg, const Profile& p) {
  return ((cfg.g * p.H).sqrt() - p.V).minCoeff();
}

double max_wave_speed(const ChannelConfig& cfg, const Profile& p) {
  return (p.V.abs() + (cfg.g * p.H).sqrt()).maxCoeff();
}

}  // namespace svpi
