#pragma once

// Method-of-lines simulator for the closed-loop Saint-Venant system: inflow
// boundary at x = 0, PI gate at x = L, integrator state Z.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "svpi/channel.hpp"
#include "svpi/grid.hpp"
#include "svpi/inflow.hpp"

namespace svpi {

/// Uniformly sampled signal on [t0, t0 + (n-1) dt] with four-point Lagrange
/// interpolation in between.
class SampledSignal {
public:
  SampledSignal() = default;
  SampledSignal(double t0, double dt, std::vector<double> values);

  double operator()(double t) const;
  double t_end() const;
  bool empty() const { return v_.empty(); }

private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<double> v_;
};

/// pure_pi and feedforward are the two gate laws; pinned holds H(t, L) = H_c
/// and is used to generate target trajectories.
enum class ControllerVariant { pure_pi, feedforward, pinned };

std::string_view to_string(ControllerVariant v);

struct ControllerSpec {
  double k_p = 0.0;
  double k_I = 0.0;
  double H_c = 1.0;
  ControllerVariant variant = ControllerVariant::pure_pi;
  SampledSignal feedforward_flux;  // H1 V1 (t, L), required for feedforward

  /// Throws DomainError on H_c <= 0 or a missing/short feedforward table.
  void validate(double horizon) const;

  /// Gate discharge as a(H) = slope * H + offset for given Z and t.
  struct Affine {
    double slope;
    double offset;
  };
  Affine gate(double v_g, double Z, double t) const;
};

struct SimState {
  double t = 0.0;
  Profile profile;
  double Z = 0.0;
};

/// Channel plus grid-level data fixed for a run: slope samples and the
/// artificial-dissipation coefficient.
struct Discretization {
  ChannelConfig cfg;
  Grid grid;
  Field C;
  double sigma = 0.0;
  double cfl = 0.4;
  double dt_safety = 0.8;

  static Discretization make(const ChannelConfig& cfg, const Grid& grid,
                             double sigma);
};

/// 0.02 max(lambda1) over the profile.
double default_sigma(const ChannelConfig& cfg, const Profile& p,
                     double factor = 0.02);

/// Semi-discrete right-hand side (dH/dt, dV/dt) at every node. The boundary
/// entries use one-sided differences; the stepper overwrites boundary nodes
/// through apply_boundaries and never integrates them.
std::pair<Field, Field> interior_rhs(const Discretization& d, const Field& H,
                                     const Field& V);

struct BoundaryValues {
  double H0, V0, HL, VL;
};

/// Solves both boundary relations with the extrapolated outgoing invariant.
/// Reads interior nodes of H, V and the current boundary values (to pick the
/// physical root). Throws RegimeError / BoundarySolveError.
BoundaryValues apply_boundaries(const Discretization& d,
                                const ControllerSpec& ctrl, const Field& H,
                                const Field& V, double Z, double t,
                                double Q0_now);

/// Residual of the downstream relation at the current boundary state.
double controller_residual(const Discretization& d, const ControllerSpec& ctrl,
                           const SimState& s);

/// One RK4 step of (H, V, Z). Throws CflError if dt exceeds the CFL bound.
SimState step(const Discretization& d, const ControllerSpec& ctrl,
              const SimState& s, const InflowSignal& inflow, double dt);

/// Largest stable step for the state: cfl dx / max(|V| + sqrt(gH)).
double cfl_dt(const Discretization& d, const Profile& p);

/// Z making the downstream relation exact for the given state.
double consistent_Z(const Discretization& d, const ControllerSpec& ctrl,
                    const Profile& p, double t);

/// Discrete steady state: interior rhs = 0, H V (0) = Q, H(L) = H_c (or the
/// gate relation when k_I = 0), and the extrapolation relations at both
/// ends. Newton from solve_steady, with Z from consistent_Z.
SimState discrete_steady_state(const Discretization& d,
                               const ControllerSpec& ctrl, double Q,
                               double t = 0.0);

struct Sample {
  double t = 0.0;
  Field H, V;
  double Z = 0.0;
  double Q0 = 0.0;
  double flux_L = 0.0;
  /// States at t - 2dt .. t + 2dt (H, V, Z); absent near the ends of a run.
  bool has_stencil = false;
  std::array<Field, 5> sH, sV;
  std::array<double, 5> sZ{};
};

struct TrajectoryRecord {
  double dt = 0.0;
  double sample_every = 0.0;
  std::vector<Sample> samples;
  std::vector<double> step_flux_L;  // H V (t_j, L) every step, when requested
  bool completed = false;
  std::string failure;
  std::string failure_kind;
  std::optional<double> failure_time;
  std::optional<double> failure_x;
  double max_controller_residual = 0.0;
};

struct RunOptions {
  double horizon = 1.0;
  double sample_every = 0.1;
  std::optional<double> dt;   // fixed step; derived from the CFL bound if empty
  bool record_step_flux = false;
  bool keep_stencils = true;
};

/// Integrates from initial to horizon. Regime, boundary or CFL failures end
/// the run early and are reported in the record instead of thrown.
TrajectoryRecord run(const Discretization& d, const ControllerSpec& ctrl,
                     const SimState& initial, const InflowSignal& inflow,
                     const RunOptions& opt);

/// A * sin^4 bump supported on [center - width/2, center + width/2].
Field smooth_bump(const Grid& grid, double amplitude, double center,
                  double width);

}  // namespace svpi
