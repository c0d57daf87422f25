#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "svpi/numerics.hpp"

namespace svpi {

struct ConstantInflow {
  double q = 1.0;
};

/// q_mean + amplitude * sin(omega * t).
struct SinusoidInflow {
  double q_mean = 1.0;
  double amplitude = 0.0;
  double omega = 0.0;
};

/// Smooth transition q0 -> q1 on [t0, t0 + duration] using the degree-7
/// smoothstep, so the signal is C^3.
struct RampInflow {
  double q0 = 1.0;
  double q1 = 1.0;
  double t0 = 0.0;
  double duration = 1.0;
};

/// Time samples with a not-a-knot spline; held constant outside the samples.
struct TabulatedInflow {
  std::vector<double> t;
  std::vector<double> q;
  CubicSpline spline;

  TabulatedInflow() = default;
  TabulatedInflow(std::vector<double> ts, std::vector<double> qs);
};

/// Upstream discharge Q0(t) with derivatives up to third order.
class InflowSignal {
public:
  using Variant =
      std::variant<ConstantInflow, SinusoidInflow, RampInflow, TabulatedInflow>;

  InflowSignal() : v_(ConstantInflow{}) {}
  InflowSignal(Variant v);  // NOLINT(google-explicit-constructor)

  double operator()(double t) const { return derivative(t, 0); }
  /// d^order Q0 / dt^order, order in 0..3.
  double derivative(double t, int order) const;

  /// sup over [0, horizon] of |d^order Q0/dt^order|, order in 1..3. Closed
  /// form for constant, sinusoid and ramp; sampled for tabulated signals.
  double derivative_bound(int order, double horizon) const;
  /// min over [0, horizon] of Q0.
  double min_value(double horizon) const;

  bool is_constant() const;
  /// Forcing period for sinusoids, 0 otherwise.
  double period() const;
  std::string kind() const;

  const Variant& variant() const { return v_; }

private:
  Variant v_;
};

}  // namespace svpi
