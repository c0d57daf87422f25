#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "svpi/errors.hpp"
#include "svpi/riemann.hpp"
#include "svpi/steady.hpp"

using svpi::ChannelConfig;
using svpi::Field;
using svpi::Grid;
using svpi::Profile;

namespace {

double simpson(const Field& f, double dx) {
  const Eigen::Index n = f.size();
  double s = f(0) + f(n - 1);
  for (Eigen::Index i = 1; i < n - 1; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i);
  return s * dx / 3.0;
}

// log phi1(L) and log phi2(L) from a plain Simpson sum on an n-node steady base.
std::pair<double, double> log_phi_at_L(const ChannelConfig& c, int n) {
  const auto f = svpi::coupling_coefficients(c, svpi::solve_steady(c, 2.0, 2.0, Grid::uniform(c.L, n)));
  return {simpson(f.gamma1 / f.lambda1, f.grid.dx), -simpson(f.delta2 / f.lambda2, f.grid.dx)};
}

}  // namespace

TEST_SUITE("riemann") {

TEST_CASE("eigenvalues") {
  auto [l1, l2] = svpi::eigenvalues(9.81, 2.0, 1.0);
  CHECK(l1 == doctest::Approx(5.429447).epsilon(1e-7));
  CHECK(l2 == doctest::Approx(3.429447).epsilon(1e-7));
  std::tie(l1, l2) = svpi::eigenvalues(9.81, 2.0, 0.0);
  CHECK(l1 == l2);
  CHECK(l1 == doctest::Approx(std::sqrt(19.62)));
  std::tie(l1, l2) = svpi::eigenvalues(9.81, 1.0, 1.0);
  CHECK(l1 == doctest::Approx(1.0 + std::sqrt(9.81)));
  CHECK(l2 == doctest::Approx(std::sqrt(9.81) - 1.0));
  CHECK_THROWS_AS(svpi::eigenvalues(9.81, 0.05, 3.0), svpi::RegimeError);
}

TEST_CASE("coupling coefficients on uniform bases") {
  const Grid g = Grid::uniform(10.0, 41);
  const Profile base = Profile::uniform(g, 2.0, 1.0);
  const auto f0 = svpi::coupling_coefficients(fixtures::homogeneous(), base);
  for (const Field* c : {&f0.gamma1, &f0.gamma2, &f0.delta1, &f0.delta2}) {
    CHECK(c->abs().maxCoeff() == 0.0);
  }

  const ChannelConfig c = fixtures::friction_only();
  const auto f = svpi::coupling_coefficients(c, base);
  const double H = 2.0, V = 1.0, k = c.k;
  const double e = k * V * V / (2 * H * H) * std::sqrt(H / c.g);
  CHECK(f.gamma1(7) == doctest::Approx(k * V / H - e).epsilon(1e-14));
  CHECK(f.gamma2(7) == doctest::Approx(k * V / H + e).epsilon(1e-14));
  CHECK(f.delta2(7) == doctest::Approx(k * V / H + e).epsilon(1e-14));
  CHECK(f.delta1(7) == doctest::Approx(f.gamma1(7)).epsilon(1e-14));
}

TEST_CASE("nodewise identities on steady bases") {
  for (const ChannelConfig& c : {fixtures::friction_only(), fixtures::friction_slope()}) {
    const auto f = svpi::coupling_coefficients(c, svpi::solve_steady(c, 2.0, 2.0, Grid::uniform(c.L, 201)));
    const Field sq = (c.g / f.H1).sqrt();
    const Field cel = (c.g * f.H1).sqrt();
    const Field rt = (f.H1 / c.g).sqrt();
    const double k = c.k;

    CHECK((f.lambda1 - f.lambda2 - 2 * f.V1).abs().maxCoeff() < 1e-14);
    CHECK((f.lambda1 + f.lambda2 - 2 * cel).abs().maxCoeff() < 1e-13);

    const Field diff = 0.5 * (sq * f.dH1dx + f.dV1dx) - k * f.V1.square() / f.H1.square() * rt;
    CHECK((f.gamma1 - f.gamma2 - diff).abs().maxCoeff() < 1e-12);

    const Field lhs = f.lambda1 * f.gamma2 + f.lambda2 * f.delta1;
    const Field rhs = 2 * k * f.V1 / f.H1 * cel + k * f.V1.cube() / f.H1.square() * rt +
                      f.V1 * sq * f.dH1dx / 2 + f.dV1dx * cel / 2;
    CHECK((lhs - rhs).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("phi weights") {
  SUBCASE("uniform frictionless base") {
    const auto f = svpi::riemann_fields(fixtures::homogeneous(),
                                        Profile::uniform(Grid::uniform(10.0, 41), 2.0, 1.0));
    CHECK((f.phi1 - 1.0).abs().maxCoeff() == 0.0);
    CHECK((f.phi2 - 1.0).abs().maxCoeff() == 0.0);
    CHECK((f.phi - 1.0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("constant integrand gives an exact exponential") {
    const ChannelConfig c = fixtures::friction_only();
    const auto f = svpi::riemann_fields(c, Profile::uniform(Grid::uniform(c.L, 41), 2.0, 1.0));
    const double rate = f.gamma1(0) / f.lambda1(0);
    CHECK(f.phi1(40) == doctest::Approx(std::exp(rate * c.L)).epsilon(1e-14));
  }
  SUBCASE("steady friction base matches a 10x finer Simpson oracle") {
    const ChannelConfig c = fixtures::friction_slope();
    const auto f = svpi::riemann_fields(c, svpi::solve_steady(c, 2.0, 2.0, Grid::uniform(c.L, 401)));
    const auto [l1, l2] = log_phi_at_L(c, 4001);
    CHECK(std::abs(f.phi1(400) / std::exp(l1) - 1.0) < 1e-8);
    CHECK(std::abs(f.phi2(400) / std::exp(l2) - 1.0) < 1e-8);
  }
  SUBCASE("fourth-order convergence") {
    const ChannelConfig c = fixtures::friction_only();
    const double ref = log_phi_at_L(c, 3201).first;
    auto err = [&](int n) {
      const auto f = svpi::riemann_fields(c, svpi::solve_steady(c, 2.0, 2.0, Grid::uniform(c.L, n)));
      return std::abs(std::log(f.phi1(n - 1)) - ref);
    };
    CHECK(std::log2(err(51) / err(101)) >= 3.8);
  }
  SUBCASE("even node counts are rejected") {
    auto f = svpi::coupling_coefficients(fixtures::homogeneous(),
                                         Profile::uniform(Grid::uniform(10.0, 40), 2.0, 1.0));
    CHECK_THROWS_AS(svpi::phi_weights(f), svpi::DomainError);
  }
}

TEST_CASE("Riemann coordinates") {
  const Grid g = Grid::uniform(10.0, 21);
  const Profile base = Profile::uniform(g, 2.0, 1.0, svpi::ProfileRole::steady);

  const auto [z1, z2] = svpi::to_riemann(base, base, 9.81);
  CHECK(z1.abs().maxCoeff() == 0.0);
  CHECK(z2.abs().maxCoeff() == 0.0);

  Profile bumped = base;
  bumped.H += 1e-3;
  const auto [u1, u2] = svpi::to_riemann(bumped, base, 9.81);
  CHECK(u1(5) == doctest::Approx(1e-3 * std::sqrt(9.81 / 2.0)).epsilon(1e-10));
  CHECK(u2(5) == doctest::Approx(-u1(5)).epsilon(1e-13));

  const Profile dev0 = svpi::from_riemann(Field::Zero(21), Field::Zero(21), base, 9.81);
  CHECK(dev0.H.abs().maxCoeff() == 0.0);
  CHECK(dev0.V.abs().maxCoeff() == 0.0);
  const Profile dev1 = svpi::from_riemann(Field::Ones(21), Field::Ones(21), base, 9.81);
  CHECK(dev1.H.abs().maxCoeff() == 0.0);
  CHECK((dev1.V - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("property: round trips are exact to 1e-13 on 100 random subcritical states") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uH(0.5, 4.0), uv(-0.5, 0.5), uu(-1.0, 1.0);
  const Grid g = Grid::uniform(10.0, 33);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Field H1(g.n), h(g.n), v(g.n), u1(g.n), u2(g.n);
    for (int i = 0; i < g.n; ++i) {
      H1(i) = uH(rng);
      h(i) = 0.1 * uv(rng);
      v(i) = uv(rng);
      u1(i) = uu(rng);
      u2(i) = uu(rng);
    }
    const auto [a1, a2] = svpi::to_riemann(h, v, H1, 9.81);
    const auto [hb, vb] = svpi::from_riemann(a1, a2, H1, 9.81);
    worst = std::max({worst, (hb - h).abs().maxCoeff(), (vb - v).abs().maxCoeff()});
    const auto [hc, vc] = svpi::from_riemann(u1, u2, H1, 9.81);
    const auto [b1, b2] = svpi::to_riemann(hc, vc, H1, 9.81);
    worst = std::max({worst, (b1 - u1).abs().maxCoeff(), (b2 - u2).abs().maxCoeff()});
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("profile overloads reject mismatched grids") {
  const Profile a = Profile::uniform(Grid::uniform(10.0, 21), 2.0, 1.0);
  const Profile b = Profile::uniform(Grid::uniform(10.0, 41), 2.0, 1.0);
  CHECK_THROWS_AS(svpi::to_riemann(a, b, 9.81), svpi::DomainError);
}

}  // TEST_SUITE
