#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svpi/certifier.hpp"
#include "svpi/grid.hpp"
#include "svpi/inflow.hpp"
#include "svpi/pde.hpp"

namespace svpi {

/// Discrete H^2 norm of a deviation pair: sqrt(sum_i w_i (f^2 + (Df)^2 +
/// (D^2 f)^2)) over both fields, Simpson weights, 4th-order D. n >= 7.
double h2_norm(const Field& dH, const Field& dV, const Grid& grid);
/// Discrete L^2 norm of a deviation pair with the same weights.
double l2_norm(const Field& dH, const Field& dV, const Grid& grid);

struct NormSeries {
  std::vector<double> t;
  std::vector<double> h2;
  std::vector<double> l2;
  std::vector<double> z_abs;
  std::vector<double> lyap;     // Va + Vb + Vc where available, else NaN
  std::vector<double> lyap_a;
  std::vector<double> lyap_b;
  std::vector<double> lyap_c;
};

/// int f1 e^{-mu x} u1^2 + f2 e^{mu x} u2^2 dx + q z^2.
double lyapunov_form(const Certificate& cert, const Field& u1, const Field& u2,
                     double z);

struct LyapunovValue {
  double Va = 0.0;
  std::optional<double> Vb;
  std::optional<double> Vc;
  double V = 0.0;  // Va + Vb + Vc (only Va when the time stencil is absent)
};

/// Lyapunov value of a recorded sample around a steady target with integrator
/// reference Z_ref. dt u from the semi-discrete rhs at interior nodes and from
/// time differences at the two boundary nodes; dtt u from centered differences
/// of dt u across the stencil. E is taken as the identity.
LyapunovValue lyapunov_value(const Certificate& cert, const Discretization& d,
                             const ControllerSpec& ctrl, const Sample& s,
                             double dt, const Profile& target, double Z_ref);

/// Norms (and Lyapunov values when cert is given) of every sample against a
/// fixed steady reference.
NormSeries norm_series(const TrajectoryRecord& rec, const Discretization& d,
                       const ControllerSpec& ctrl, const Profile& reference,
                       double Z_ref, const Certificate* cert = nullptr);

struct DecayFit {
  double gamma = 0.0;
  double r2 = 0.0;
  double log_c = 0.0;
  int samples = 0;
};

/// Least squares of log(value) against t on [t_start, end]. Throws
/// DomainError on fewer than 20 samples or non-positive values in the window.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   double t_start);

struct IssOptions {
  int window_periods = 5;
  double transient = 0.0;     // earliest allowed window start
  double trend_tolerance = 1.1;
  double z_drift_tolerance = 0.1;
};

struct IssReport {
  bool exponential_regime = false;  // constant inflow: no forcing to measure
  double forcing_sup = 0.0;         // sup |Q'| + |Q''| + |Q'''|
  double deviation_sup = 0.0;       // sup of the deviation in the window
  double gain = 0.0;                // deviation_sup / forcing_sup
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<double> period_sup;   // per-period sup of the deviation
  double trend_ratio = 0.0;         // max/min of period_sup
  bool bounded = false;
  double z_drift = 0.0;             // spread of per-period Z means / Z amplitude
  bool z_stationary = true;
};

/// Bounded-deviation check for a deviation series from the quasi-static
/// family. Z series may be empty. Throws DomainError when the window covers
/// fewer than window_periods forcing periods.
IssReport iss_check(const std::vector<double>& t,
                    const std::vector<double>& deviation,
                    const std::vector<double>& Z, const InflowSignal& inflow,
                    double horizon, const IssOptions& opt = {});

/// Max over samples with a time stencil of |d/dt int H - (Q0 - (HV)(L))| / Q0.
double mass_balance_residual(const TrajectoryRecord& rec, const Grid& grid);

}  // namespace svpi
