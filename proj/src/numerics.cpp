#include "svpi/numerics.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "svpi/grid.hpp"

namespace svpi {

Grid Grid::uniform(double L, int n) {
  if (!(L > 0.0)) throw DomainError("Grid: L must be positive");
  if (n < 3) throw DomainError("Grid: need at least 3 nodes");
  Grid g;
  g.n = n;
  g.L = L;
  g.dx = L / (n - 1);
  g.x = Field::LinSpaced(n, 0.0, L);
  g.x(n - 1) = L;
  return g;
}

std::string_view to_string(ProfileRole role) {
  switch (role) {
    case ProfileRole::steady: return "steady";
    case ProfileRole::quasi_static: return "quasi_static";
    case ProfileRole::target: return "target";
    case ProfileRole::state: return "state";
  }
  return "state";
}

Profile::Profile(Grid g, Field h, Field v, ProfileRole r)
    : grid(std::move(g)), H(std::move(h)), V(std::move(v)), role(r) {
  if (H.size() != grid.n || V.size() != grid.n) {
    throw DomainError("Profile: field size does not match grid");
  }
}

Profile Profile::uniform(const Grid& g, double h, double v, ProfileRole r) {
  return Profile(g, Field::Constant(g.n, h), Field::Constant(g.n, v), r);
}

Eigen::ArrayXd integration_weights(Eigen::Index n, double dx) {
  if (n < 3) throw DomainError("integration_weights: need at least 3 nodes");
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n);
  const Eigen::Index intervals = n - 1;
  Eigen::Index simpson_end = intervals;  // last node covered by Simpson
  if (intervals % 2 == 1) {
    if (n < 4) throw DomainError("integration_weights: even n needs n >= 4");
    simpson_end = intervals - 3;
  }
  for (Eigen::Index i = 0; i + 2 <= simpson_end; i += 2) {
    w(i) += dx / 3.0;
    w(i + 1) += 4.0 * dx / 3.0;
    w(i + 2) += dx / 3.0;
  }
  if (simpson_end != intervals) {
    const Eigen::Index s = simpson_end;
    w(s) += 3.0 * dx / 8.0;
    w(s + 1) += 9.0 * dx / 8.0;
    w(s + 2) += 9.0 * dx / 8.0;
    w(s + 3) += 3.0 * dx / 8.0;
  }
  return w;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 4 || y_.size() != n) {
    throw DomainError("CubicSpline: need at least 4 nodes and matching values");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw DomainError("CubicSpline: abscissae must be strictly increasing");
    }
  }
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto N = static_cast<int>(n);
  // not-a-knot: third derivative continuous across x_1 and x_{n-2}
  t.emplace_back(0, 0, h[1]);
  t.emplace_back(0, 1, -(h[0] + h[1]));
  t.emplace_back(0, 2, h[0]);
  for (int i = 1; i < N - 1; ++i) {
    t.emplace_back(i, i - 1, h[i - 1]);
    t.emplace_back(i, i, 2.0 * (h[i - 1] + h[i]));
    t.emplace_back(i, i + 1, h[i]);
    rhs(i) = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
  }
  t.emplace_back(N - 1, N - 3, h[N - 2]);
  t.emplace_back(N - 1, N - 2, -(h[N - 3] + h[N - 2]));
  t.emplace_back(N - 1, N - 1, h[N - 3]);

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw DomainError("CubicSpline: singular spline system");
  }
  const Eigen::VectorXd m = lu.solve(rhs);
  m_.assign(m.data(), m.data() + n);
}

double CubicSpline::eval(double x, int order) const {
  const std::size_t n = x_.size();
  if (n == 0) throw DomainError("CubicSpline: empty spline");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t k = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  k = std::min(k, n - 2);
  const double h = x_[k + 1] - x_[k];
  const double a = x_[k + 1] - x;
  const double b = x - x_[k];
  const double ca = y_[k] / h - m_[k] * h / 6.0;
  const double cb = y_[k + 1] / h - m_[k + 1] * h / 6.0;
  switch (order) {
    case 0:
      return m_[k] * a * a * a / (6.0 * h) + m_[k + 1] * b * b * b / (6.0 * h) +
             ca * a + cb * b;
    case 1:
      return -m_[k] * a * a / (2.0 * h) + m_[k + 1] * b * b / (2.0 * h) - ca + cb;
    case 2:
      return (m_[k] * a + m_[k + 1] * b) / h;
    case 3:
      return (m_[k + 1] - m_[k]) / h;
    default:
      return 0.0;
  }
}

}  // namespace svpi
