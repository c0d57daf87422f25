#pragma once

#include <variant>
#include <vector>

#include "svpi/grid.hpp"
#include "svpi/numerics.hpp"

namespace svpi {

struct ConstantSlope {
  double c0 = 0.0;
};

struct AffineSlope {
  double c0 = 0.0;
  double c1 = 0.0;  // per metre
};

/// Slope samples on [0, L] with a not-a-knot cubic spline between them.
struct TabulatedSlope {
  std::vector<double> x;
  std::vector<double> c;
  CubicSpline spline;

  TabulatedSlope() = default;
  TabulatedSlope(std::vector<double> xs, std::vector<double> cs);
};

/// Slope function C(x) = -g dB/dx, stored as data so configs serialize.
using SlopeSpec = std::variant<ConstantSlope, AffineSlope, TabulatedSlope>;

/// Rectangular channel with friction, slope and a linear gate model, plus the
/// fluvial margin alpha and height cap h_max that bound the admissible states.
struct ChannelConfig {
  double g = 9.81;
  double k = 0.0;
  SlopeSpec slope = ConstantSlope{};
  double L = 1.0;
  double v_g = 1.0;
  double alpha = 1.0;
  double h_max = 10.0;

  /// Throws DomainError if an invariant is violated.
  void validate() const;
};

/// C(x). Throws DomainError for x outside [0, L].
double slope_at(const ChannelConfig& cfg, double x);

/// C sampled at every grid node.
Field slope_on(const ChannelConfig& cfg, const Grid& grid);

/// gH - V^2; throws DomainError for H <= 0.
double froude_margin(const ChannelConfig& cfg, double H, double V);

struct RegimeReport {
  bool pass = false;
  double min_fluvial_margin = 0.0;  // min_i (g H_i - V_i^2) - alpha
  double max_height_excess = 0.0;   // max_i H_i - h_max
  double min_height = 0.0;
  int worst_node = -1;              // node with the smallest fluvial margin
};

RegimeReport validate_regime(const ChannelConfig& cfg, const Profile& p);

/// Smallest backward characteristic speed sqrt(gH) - V over the profile.
double min_lambda2(const ChannelConfig& cfg, const Profile& p);
/// Largest |V| + sqrt(gH) over the profile.
double max_wave_speed(const ChannelConfig& cfg, const Profile& p);

}  // namespace svpi
