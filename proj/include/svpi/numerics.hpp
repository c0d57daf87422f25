#pragma once

// Finite-difference, quadrature and interpolation kernels on uniform grids.
// All kernels are free functions over Eigen array expressions and work for
// any scalar type Eigen supports.

#include <Eigen/Dense>
#include <cassert>
#include <vector>

#include "svpi/errors.hpp"

namespace svpi {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// First derivative, fourth order: central interior stencil, one-sided
/// five-point stencils on the two outermost nodes at each end. n >= 5.
template <typename Derived>
ArrayX<typename Derived::Scalar> d_dx(const Eigen::ArrayBase<Derived>& f_in,
                                      double dx) {
  using S = typename Derived::Scalar;
  const ArrayX<S> f = f_in;
  const Eigen::Index n = f.size();
  if (n < 5) throw DomainError("d_dx: need at least 5 nodes");
  ArrayX<S> d(n);
  const S inv = S(1) / (S(12) * S(dx));
  d(0) = (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) * inv;
  d(1) = (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4)) * inv;
  if (n > 4) {
    const Eigen::Index m = n - 4;
    d.segment(2, m) = (f.segment(0, m) - 8 * f.segment(1, m) +
                       8 * f.segment(3, m) - f.segment(4, m)) *
                      inv;
  }
  const Eigen::Index e = n - 1;
  d(e - 1) = -(-3 * f(e) - 10 * f(e - 1) + 18 * f(e - 2) - 6 * f(e - 3) +
               f(e - 4)) *
             inv;
  d(e) = -(-25 * f(e) + 48 * f(e - 1) - 36 * f(e - 2) + 16 * f(e - 3) -
           3 * f(e - 4)) *
         inv;
  return d;
}

/// Second derivative, fourth order; six-point one-sided closures. n >= 6.
template <typename Derived>
ArrayX<typename Derived::Scalar> d2_dx2(const Eigen::ArrayBase<Derived>& f_in,
                                        double dx) {
  using S = typename Derived::Scalar;
  const ArrayX<S> f = f_in;
  const Eigen::Index n = f.size();
  if (n < 6) throw DomainError("d2_dx2: need at least 6 nodes");
  ArrayX<S> d(n);
  const S inv = S(1) / (S(12) * S(dx) * S(dx));
  d(0) = (45 * f(0) - 154 * f(1) + 214 * f(2) - 156 * f(3) + 61 * f(4) -
          10 * f(5)) *
         inv;
  d(1) = (10 * f(0) - 15 * f(1) - 4 * f(2) + 14 * f(3) - 6 * f(4) + f(5)) *
         inv;
  const Eigen::Index m = n - 4;
  d.segment(2, m) = (-f.segment(0, m) + 16 * f.segment(1, m) -
                     30 * f.segment(2, m) + 16 * f.segment(3, m) -
                     f.segment(4, m)) *
                    inv;
  const Eigen::Index e = n - 1;
  d(e - 1) = (10 * f(e) - 15 * f(e - 1) - 4 * f(e - 2) + 14 * f(e - 3) -
              6 * f(e - 4) + f(e - 5)) *
             inv;
  d(e) = (45 * f(e) - 154 * f(e - 1) + 214 * f(e - 2) - 156 * f(e - 3) +
          61 * f(e - 4) - 10 * f(e - 5)) *
         inv;
  return d;
}

/// B^T B f where (B f)_i = f_{i-1} - 2 f_i + f_{i+1}, i = 1..n-2.
/// Equals the undivided fourth difference away from the ends and is
/// positive semidefinite, so -c * fourth_difference(f) is dissipative.
template <typename Derived>
ArrayX<typename Derived::Scalar> fourth_difference(
    const Eigen::ArrayBase<Derived>& f_in) {
  using S = typename Derived::Scalar;
  const ArrayX<S> f = f_in;
  const Eigen::Index n = f.size();
  if (n < 3) throw DomainError("fourth_difference: need at least 3 nodes");
  ArrayX<S> s = ArrayX<S>::Zero(n);
  s.segment(1, n - 2) =
      f.segment(0, n - 2) - 2 * f.segment(1, n - 2) + f.segment(2, n - 2);
  ArrayX<S> out = ArrayX<S>::Zero(n);
  out.segment(0, n - 1) += s.segment(1, n - 1);
  out -= 2 * s;
  out.segment(1, n - 1) += s.segment(0, n - 1);
  return out;
}

/// Centered undivided fourth difference at nodes 3..n-4 and zero elsewhere,
/// so the stencil reads only nodes 1..n-2. O(dx^4) at every node, unlike
/// B^T B whose rows next to the ends reduce to second differences.
template <typename Derived>
ArrayX<typename Derived::Scalar> fourth_difference_interior(
    const Eigen::ArrayBase<Derived>& f_in) {
  using S = typename Derived::Scalar;
  const ArrayX<S> f = f_in;
  const Eigen::Index n = f.size();
  if (n < 7) throw DomainError("fourth_difference_interior: need at least 7 nodes");
  const Eigen::Index m = n - 6;
  ArrayX<S> out = ArrayX<S>::Zero(n);
  out.segment(3, m) = f.segment(1, m) - 4 * f.segment(2, m) + 6 * f.segment(3, m) -
                      4 * f.segment(4, m) + f.segment(5, m);
  return out;
}

/// Composite quadrature weights: Simpson for odd n, Simpson plus a closing
/// 3/8 panel for even n. n >= 4 (or n == 3).
Eigen::ArrayXd integration_weights(Eigen::Index n, double dx);

template <typename Derived>
typename Derived::Scalar integrate(const Eigen::ArrayBase<Derived>& f,
                                   double dx) {
  return (integration_weights(f.size(), dx).template cast<
              typename Derived::Scalar>() *
          f.derived())
      .sum();
}

/// Running integral F_i = int_0^{x_i} f, fourth order at every node.
template <typename Derived>
ArrayX<typename Derived::Scalar> cumulative_integral(
    const Eigen::ArrayBase<Derived>& f_in, double dx) {
  using S = typename Derived::Scalar;
  const ArrayX<S> f = f_in;
  const Eigen::Index n = f.size();
  if (n < 4) throw DomainError("cumulative_integral: need at least 4 nodes");
  ArrayX<S> F(n);
  F(0) = S(0);
  F(1) = S(dx) * (9 * f(0) + 19 * f(1) - 5 * f(2) + f(3)) / S(24);
  for (Eigen::Index i = 2; i < n; ++i) {
    F(i) = F(i - 2) + S(dx) / S(3) * (f(i - 2) + 4 * f(i - 1) + f(i));
  }
  return F;
}

/// Cubic (four-point Lagrange) value at x_i + dx/2, i in [0, n-2].
template <typename Derived>
typename Derived::Scalar midpoint_cubic(const Eigen::ArrayBase<Derived>& f,
                                        Eigen::Index i) {
  const Eigen::Index n = f.size();
  assert(n >= 4 && i >= 0 && i <= n - 2);
  if (i == 0) {
    return (5 * f(0) + 15 * f(1) - 5 * f(2) + f(3)) / 16.0;
  }
  if (i == n - 2) {
    return (f(n - 4) - 5 * f(n - 3) + 15 * f(n - 2) + 5 * f(n - 1)) / 16.0;
  }
  return (-f(i - 1) + 9 * f(i) + 9 * f(i + 1) - f(i + 2)) / 16.0;
}

/// Not-a-knot cubic spline through (x_k, y_k); C^2, exact for cubics.
class CubicSpline {
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const { return eval(x, 0); }
  /// Value (order 0) or derivative of order 1..3 at x.
  double eval(double x, int order) const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace svpi
