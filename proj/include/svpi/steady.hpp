#pragma once

#include <vector>

#include "svpi/channel.hpp"
#include "svpi/grid.hpp"
#include "svpi/inflow.hpp"

namespace svpi {

/// dH/dx = (C(x) - k Q^2/H^3) / (g - Q^2/H^3) for the steady flow of
/// discharge Q. Throws RegimeError when g H^3 <= Q^2.
double steady_rhs(const ChannelConfig& cfg, double H, double x, double Q);

/// Steady profile with H(L) = H_c, integrated backward by classical RK4 with
/// one step per grid cell; V = Q / H at every node.
Profile solve_steady(const ChannelConfig& cfg, double Q, double H_c,
                     const Grid& grid);

/// Max nodal residual of the two steady equations, (HV)_x and
/// V V_x + g H_x + k V^2/H - C, with 4th-order differences.
double steady_residual(const ChannelConfig& cfg, const Profile& p);

/// solve_steady(cfg, Q0(t), H_c, grid) for every requested time.
std::vector<Profile> quasi_static_family(const ChannelConfig& cfg,
                                         const InflowSignal& inflow, double H_c,
                                         const Grid& grid,
                                         const std::vector<double>& times);

}  // namespace svpi
