#include "svpi/inflow.hpp"

#include <algorithm>
#include <cmath>

#include "svpi/errors.hpp"

namespace svpi {

namespace {

// Degree-7 smoothstep and its derivatives on tau in [0, 1].
double smoothstep(double tau, int order) {
  const double w = tau * (1.0 - tau);
  switch (order) {
    case 0:
      return tau * tau * tau * tau *
             (35.0 + tau * (-84.0 + tau * (70.0 - 20.0 * tau)));
    case 1:
      return 140.0 * w * w * w;
    case 2:
      return 420.0 * w * w * (1.0 - 2.0 * tau);
    default:
      return 840.0 * w * (1.0 - 5.0 * w);
  }
}

// sup |s^(order)| on [0, 1].
double smoothstep_bound(int order) {
  switch (order) {
    case 1:
      return 35.0 / 16.0;
    case 2:
      return 16.8 / std::sqrt(5.0);
    default:
      return 52.5;
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TabulatedInflow::TabulatedInflow(std::vector<double> ts, std::vector<double> qs)
    : t(std::move(ts)), q(std::move(qs)) {
  if (t.size() < 4) throw DomainError("tabulated inflow needs at least 4 samples");
  spline = CubicSpline(t, q);
}

InflowSignal::InflowSignal(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const ConstantInflow&) {},
                 [](const SinusoidInflow& s) {
                   if (s.omega < 0.0) throw DomainError("inflow: omega must be >= 0");
                 },
                 [](const RampInflow& r) {
                   if (!(r.duration > 0.0)) {
                     throw DomainError("inflow: ramp duration must be positive");
                   }
                 },
                 [](const TabulatedInflow& tab) {
                   if (tab.t.size() < 4) {
                     throw DomainError("inflow: tabulated needs >= 4 samples");
                   }
                 },
             },
             v_);
}

double InflowSignal::derivative(double t, int order) const {
  if (order < 0 || order > 3) throw DomainError("inflow: derivative order must be 0..3");
  return std::visit(
      overloaded{
          [&](const ConstantInflow& c) { return order == 0 ? c.q : 0.0; },
          [&](const SinusoidInflow& s) {
            const double p = std::pow(s.omega, order);
            const double ph = s.omega * t;
            switch (order) {
              case 0:
                return s.q_mean + s.amplitude * std::sin(ph);
              case 1:
                return s.amplitude * p * std::cos(ph);
              case 2:
                return -s.amplitude * p * std::sin(ph);
              default:
                return -s.amplitude * p * std::cos(ph);
            }
          },
          [&](const RampInflow& r) {
            const double tau = (t - r.t0) / r.duration;
            if (tau <= 0.0) return order == 0 ? r.q0 : 0.0;
            if (tau >= 1.0) return order == 0 ? r.q1 : 0.0;
            const double scale = (r.q1 - r.q0) / std::pow(r.duration, order);
            return (order == 0 ? r.q0 : 0.0) + scale * smoothstep(tau, order);
          },
          [&](const TabulatedInflow& tab) {
            if (t <= tab.t.front()) return order == 0 ? tab.q.front() : 0.0;
            if (t >= tab.t.back()) return order == 0 ? tab.q.back() : 0.0;
            return tab.spline.eval(t, order);
          },
      },
      v_);
}

double InflowSignal::derivative_bound(int order, double horizon) const {
  if (order < 1 || order > 3) throw DomainError("inflow: bound order must be 1..3");
  return std::visit(
      overloaded{
          [](const ConstantInflow&) { return 0.0; },
          [&](const SinusoidInflow& s) {
            return std::abs(s.amplitude) * std::pow(s.omega, order);
          },
          [&](const RampInflow& r) {
            if (horizon <= r.t0) return 0.0;
            return std::abs(r.q1 - r.q0) / std::pow(r.duration, order) *
                   smoothstep_bound(order);
          },
          [&](const TabulatedInflow&) {
            constexpr int samples = 20000;
            double m = 0.0;
            for (int i = 0; i <= samples; ++i) {
              m = std::max(m, std::abs(derivative(horizon * i / samples, order)));
            }
            return m;
          },
      },
      v_);
}

double InflowSignal::min_value(double horizon) const {
  return std::visit(
      overloaded{
          [](const ConstantInflow& c) { return c.q; },
          [&](const SinusoidInflow& s) {
            if (s.omega * horizon >= 2.0 * M_PI) return s.q_mean - std::abs(s.amplitude);
            double m = std::min(derivative(0.0, 0), derivative(horizon, 0));
            // interior minima of sin sit at omega t = 3 pi / 2 + 2 pi j
            const double tm = (1.5 * M_PI) / std::max(s.omega, 1e-300);
            if (tm <= horizon) m = std::min(m, s.q_mean - s.amplitude);
            const double tp = (0.5 * M_PI) / std::max(s.omega, 1e-300);
            if (tp <= horizon) m = std::min(m, s.q_mean + s.amplitude);
            return m;
          },
          [](const RampInflow& r) { return std::min(r.q0, r.q1); },
          [&](const TabulatedInflow&) {
            constexpr int samples = 20000;
            double m = derivative(0.0, 0);
            for (int i = 1; i <= samples; ++i) {
              m = std::min(m, derivative(horizon * i / samples, 0));
            }
            return m;
          },
      },
      v_);
}

bool InflowSignal::is_constant() const {
  if (std::holds_alternative<ConstantInflow>(v_)) return true;
  if (const auto* s = std::get_if<SinusoidInflow>(&v_)) {
    return s->amplitude == 0.0 || s->omega == 0.0;
  }
  if (const auto* r = std::get_if<RampInflow>(&v_)) return r->q0 == r->q1;
  return false;
}

double InflowSignal::period() const {
  if (const auto* s = std::get_if<SinusoidInflow>(&v_)) {
    return s->omega > 0.0 ? 2.0 * M_PI / s->omega : 0.0;
  }
  return 0.0;
}

std::string InflowSignal::kind() const {
  return std::visit(overloaded{
                        [](const ConstantInflow&) { return std::string("constant"); },
                        [](const SinusoidInflow&) { return std::string("sinusoid"); },
                        [](const RampInflow&) { return std::string("ramp"); },
                        [](const TabulatedInflow&) { return std::string("tabulated"); },
                    },
                    v_);
}

}  // namespace svpi
