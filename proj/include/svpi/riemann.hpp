#pragma once

#include <utility>

#include "svpi/channel.hpp"
#include "svpi/grid.hpp"
#include "svpi/numerics.hpp"

namespace svpi {

/// Characteristic speeds (lambda1, lambda2) = (V + sqrt(gH), sqrt(gH) - V),
/// both positive in the fluvial regime. Throws RegimeError otherwise.
std::pair<double, double> eigenvalues(double g, double H, double V);

/// Linearization of the Saint-Venant system around a base profile (H1, V1)
/// in the coordinates u1 = v + sqrt(g/H1) h, u2 = v - sqrt(g/H1) h.
struct RiemannFields {
  Grid grid;
  double g = 9.81;
  Field H1, V1;
  Field dH1dx, dV1dx;
  Field lambda1, lambda2;
  Field gamma1, gamma2, delta1, delta2;
  Field phi1, phi2, phi;
};

/// Speeds and source-coupling coefficients; phi fields are left empty.
RiemannFields coupling_coefficients(const ChannelConfig& cfg, const Profile& base);

/// phi1 = exp(int_0^x gamma1/lambda1), phi2 = exp(-int_0^x delta2/lambda2),
/// phi = phi1/phi2. Requires odd n.
void phi_weights(RiemannFields& fields);

/// coupling_coefficients followed by phi_weights.
RiemannFields riemann_fields(const ChannelConfig& cfg, const Profile& base);

/// Riemann coordinates of a deviation (h, v) around base height H1.
template <typename DH, typename DV, typename DB>
std::pair<ArrayX<typename DH::Scalar>, ArrayX<typename DH::Scalar>> to_riemann(
    const Eigen::ArrayBase<DH>& h, const Eigen::ArrayBase<DV>& v,
    const Eigen::ArrayBase<DB>& H1, double g) {
  using S = typename DH::Scalar;
  const ArrayX<S> c = (S(g) / H1.derived().template cast<S>()).sqrt();
  return {v.derived() + c * h.derived(), v.derived() - c * h.derived()};
}

/// Inverse of to_riemann: h = (u1 - u2)/2 sqrt(H1/g), v = (u1 + u2)/2.
template <typename D1, typename D2, typename DB>
std::pair<ArrayX<typename D1::Scalar>, ArrayX<typename D1::Scalar>> from_riemann(
    const Eigen::ArrayBase<D1>& u1, const Eigen::ArrayBase<D2>& u2,
    const Eigen::ArrayBase<DB>& H1, double g) {
  using S = typename D1::Scalar;
  const ArrayX<S> s = (H1.derived().template cast<S>() / S(g)).sqrt();
  return {S(0.5) * (u1.derived() - u2.derived()) * s,
          S(0.5) * (u1.derived() + u2.derived())};
}

/// Profile overloads; throw DomainError on grid mismatch.
std::pair<Field, Field> to_riemann(const Profile& state, const Profile& base,
                                   double g);
/// Returns the deviation (h, v) packed as a Profile with role "state".
Profile from_riemann(const Field& u1, const Field& u2, const Profile& base,
                     double g);

}  // namespace svpi
