#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "svpi/channel.hpp"
#include "svpi/grid.hpp"

namespace fixtures {

inline svpi::ChannelConfig homogeneous() {
  svpi::ChannelConfig c;
  c.g = 9.81;
  c.k = 0.0;
  c.L = 10.0;
  c.v_g = 1.0;
  c.alpha = 1.0;
  c.h_max = 5.0;
  c.slope = svpi::ConstantSlope{0.0};
  return c;
}

inline svpi::ChannelConfig friction_only() {
  svpi::ChannelConfig c = homogeneous();
  c.k = 0.1;
  return c;
}

/// C(x) = mean + amplitude sin(2 pi x / L), tabulated on `samples` nodes.
inline svpi::TabulatedSlope sine_slope(double L, double mean, double amplitude,
                                       int samples = 2049) {
  std::vector<double> x(samples), c(samples);
  for (int i = 0; i < samples; ++i) {
    x[i] = L * i / (samples - 1);
    c[i] = mean + amplitude * std::sin(2.0 * std::numbers::pi * x[i] / L);
  }
  return svpi::TabulatedSlope(x, c);
}

/// Friction with a slope ripple around the value that balances friction at
/// H = 2, Q = 2 (k Q^2 / H^3 = 0.05).
inline svpi::ChannelConfig friction_slope() {
  svpi::ChannelConfig c = friction_only();
  c.slope = sine_slope(c.L, 0.05, 0.01);
  return c;
}

}  // namespace fixtures
